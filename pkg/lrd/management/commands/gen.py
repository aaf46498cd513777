import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from lrd.data import generate
from lrd.data import GENERATORS
from lrd.data import write_canonical_csv

logger = logging.getLogger("gen")


class Command(BaseCommand):
    help = "generate a synthetic dataset as canonical csv."

    def add_arguments(self, parser):
        parser.add_argument("name", choices=sorted(GENERATORS))
        parser.add_argument("--n", type=int, default=100000, help="number of rows.")
        parser.add_argument(
            "--seed",
            type=int,
            default=None,
            help="random seed, defaults to DISPARITY_LAB_SEED or 0.",
        )
        parser.add_argument("--out", required=True, help="output csv path.")

    def handle(self, *args, **options):
        seed = options["seed"]
        if seed is None:
            seed = settings.DISPARITY_LAB_SEED or 0
        out = Path(options["out"])
        try:
            dataset = generate(GENERATORS[options["name"]], options["n"], seed)
            out.parent.mkdir(parents=True, exist_ok=True)
            write_canonical_csv(dataset, out)
        except (OSError, ValueError) as exc:
            raise CommandError(f"{exc}")
        logger.info(f"{dataset.n_rows} rows written to {out}")
