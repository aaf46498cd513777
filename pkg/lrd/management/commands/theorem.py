import logging
from pathlib import Path

import pandas as pd
from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from lrd.reporter import write_series
from lrd.theory import branch_minima
from lrd.theory import feasible_grid_oracle
from lrd.theory import grid_oracle
from lrd.theory import GridSpec
from lrd.theory import InvalidScenario
from lrd.theory import REPORT_FIELDS
from lrd.theory import sweep_a
from lrd.theory import TheoremScenario
from lrd.theory import thm41_optimum
from lrd.theory import thm42_optimum
from lrd.theory import thm43_optimum

logger = logging.getLogger("theorem")

THEOREMS = ("4.1", "4.2", "4.3")


def parse_float_list(text: str):
    return [float(i) for i in text.replace(" ", "").split(",") if i]


class Command(BaseCommand):
    help = "compute the optimal disparity weights of a scenario and cross-check them."

    def add_arguments(self, parser):
        parser.add_argument("--thm", choices=THEOREMS, default="4.3")
        parser.add_argument("--delta", type=float, required=True)
        parser.add_argument("--a", type=float, default=0.99, help="disparity loss weight.")
        parser.add_argument("--alpha", type=float, default=1.0)
        parser.add_argument("--logit-o0", type=float, help="outcome logit of group S=0.")
        parser.add_argument("--nodes", type=int, default=1, help="disparity nodes.")
        parser.add_argument("--verify", action="store_true", help="compare with a grid search.")
        parser.add_argument("--grid-points", type=int, help="grid points per axis.")
        parser.add_argument("--branches", action="store_true", help="print branch minima.")
        parser.add_argument(
            "--sweep",
            type=parse_float_list,
            help="comma separated values of a to sweep.",
        )
        parser.add_argument("--sweep-out", help="write the sweep as a two-column series.")
        parser.add_argument("--out", help="write the optimum as csv.")

    def handle(self, *args, **options):
        try:
            reports, verified = self.solve(options)
        except InvalidScenario as exc:
            raise CommandError(f"{exc}")

        rows = [report.as_row() for report in reports]
        frame = pd.DataFrame(rows, columns=REPORT_FIELDS)
        self.stdout.write(frame.to_csv(index=False).rstrip("\n"))
        for report in reports:
            self.stdout.write(report.describe())
        if options["out"]:
            frame.to_csv(options["out"], index=False)
            logger.info(f"optimum written to {options['out']}")

        if verified is False:
            raise CommandError("grid check FAILED", returncode=1)

    def scenario(self, options) -> TheoremScenario:
        if options["logit_o0"] is None:
            raise CommandError("--logit-o0 is required with --thm 4.3")
        return TheoremScenario(
            delta=options["delta"],
            alpha=options["alpha"],
            logit_o0=options["logit_o0"],
            a=options["a"],
        )

    def solve(self, options):
        thm = options["thm"]
        delta = options["delta"]
        points = options["grid_points"]
        verified = None

        if thm in ("4.1", "4.2"):
            reports = (
                [thm41_optimum(delta)]
                if thm == "4.1"
                else thm42_optimum(delta, options["nodes"])
            )
            if options["verify"]:
                oracle = feasible_grid_oracle(delta, points=points or 401)
                verified = abs(oracle.l_min - reports[0].l_min) <= oracle.resolution
                self.report_check(oracle, reports[0], verified)
            return reports, verified

        scenario = self.scenario(options)
        report = thm43_optimum(scenario)
        if options["branches"]:
            for minimum in branch_minima(scenario).values():
                line = (
                    f"{minimum.branch.value}: feasible B={minimum.feasible_b:.4f} "
                    f"L={minimum.feasible_loss:.4f}"
                )
                if minimum.local_b is not None:
                    line += f", local B={minimum.local_b:.4f} L={minimum.local_loss:.4f}"
                self.stdout.write(line)
        if options["sweep"]:
            rows = sweep_a(scenario, options["sweep"])
            for row in rows:
                self.stdout.write(
                    f"a={row.a:g} L_min={row.l_min:.6f} "
                    f"B_opti={row.b_opti:.6f} {row.branch.value}",
                )
            if options["sweep_out"]:
                write_series(Path(options["sweep_out"]), [(r.a, r.l_min) for r in rows])
                logger.info(f"sweep written to {options['sweep_out']}")
        if options["verify"]:
            oracle = grid_oracle(scenario, GridSpec(points or 151))
            verified = abs(oracle.l_min - report.l_min) <= oracle.resolution
            self.report_check(oracle, report, verified)
        return [report], verified

    def report_check(self, oracle, report, verified: bool) -> None:
        status = "PASS" if verified else "FAIL"
        self.stdout.write(
            f"grid check {status}: grid L={oracle.l_min:.6f} exact L={report.l_min:.6f} "
            f"resolution {oracle.resolution:.4f}",
        )
        if not verified:
            logger.error(f"grid minimum {oracle.describe()} disagrees with {report.describe()}")
