import logging
from pathlib import Path

from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from lrd.config import find_schema
from lrd.data import load_schema
from lrd.data import preprocess
from lrd.data import read_canonical_csv
from lrd.data import read_raw_csv
from lrd.data import write_canonical_csv

logger = logging.getLogger("preprocess")


class Command(BaseCommand):
    help = "turn a raw tabular dataset into canonical 0/1 csv."

    def add_arguments(self, parser):
        parser.add_argument("raw", help="raw csv path.")
        parser.add_argument(
            "--schema",
            help="schema path or bundled schema name (german, adult, health); "
            "without it the input must already be canonical.",
        )
        parser.add_argument("--out", required=True, help="output csv path.")

    def handle(self, *args, **options):
        raw = Path(options["raw"])
        out = Path(options["out"])
        try:
            if options["schema"]:
                schema = find_schema(options["schema"])
                dataset = preprocess(read_raw_csv(raw), load_schema(schema))
            else:
                dataset = read_canonical_csv(raw)
            out.parent.mkdir(parents=True, exist_ok=True)
            write_canonical_csv(dataset, out)
        except (OSError, ValueError) as exc:
            raise CommandError(f"{exc}")
        logger.info(
            f"{raw} preprocessed: {dataset.n_rows} rows, "
            f"{dataset.n_features} features written to {out}",
        )
