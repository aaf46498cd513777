import logging
from pathlib import Path

import pandas as pd
from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from lrd.data import GENERATORS
from lrd.data import read_canonical_csv
from lrd.metrics import consistency_ratio
from lrd.metrics import EVAL_FIELDS
from lrd.metrics import evaluate
from lrd.metrics import optimal_bce
from lrd.metrics import Target
from lrd.metrics import top_features
from lrd.network import load_params

logger = logging.getLogger("eval")


class Command(BaseCommand):
    help = "evaluate trained parameters on a canonical dataset."

    def add_arguments(self, parser):
        parser.add_argument("--params", required=True, help="parameter file of a fit.")
        parser.add_argument("--data", required=True, help="canonical csv to evaluate on.")
        parser.add_argument("--case", default="", help="label for the output row.")
        parser.add_argument(
            "--cm-other",
            type=float,
            help="consistency measure of another model, prints the ratio.",
        )
        parser.add_argument(
            "--generator",
            choices=sorted(GENERATORS),
            help="also print the optimal C and D of a generator.",
        )
        parser.add_argument("--out", help="write the evaluation row as csv.")

    def handle(self, *args, **options):
        try:
            params = load_params(Path(options["params"]))
            dataset = read_canonical_csv(Path(options["data"]))
            report = evaluate(params, dataset)
            features = top_features(params, dataset.feature_names)
        except (OSError, ValueError) as exc:
            raise CommandError(f"{exc}")

        row = report.as_row(options["data"], options["case"], 0)
        frame = pd.DataFrame([row], columns=EVAL_FIELDS)
        self.stdout.write(frame.to_csv(index=False).rstrip("\n"))
        if options["out"]:
            frame.to_csv(options["out"], index=False)
            logger.info(f"evaluation written to {options['out']}")

        if options["cm_other"] is not None:
            try:
                ratio = consistency_ratio(options["cm_other"], report.cm)
            except ZeroDivisionError as exc:
                raise CommandError(f"{exc}")
            self.stdout.write(f"CR={ratio:.4f}")
        if options["generator"]:
            spec = GENERATORS[options["generator"]]
            c_opt = optimal_bce(spec, Target.H)
            d_opt = optimal_bce(spec, Target.Y)
            self.stdout.write(f"C_opt={c_opt:.4f} D_opt={d_opt:.4f}")
        for name, weight in features:
            self.stdout.write(f"{name}\t{weight:.4f}")
