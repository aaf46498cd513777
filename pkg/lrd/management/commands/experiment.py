import logging

from django.core.management.base import BaseCommand
from django.core.management.base import CommandError

from lrd.config import ConfigError
from lrd.config import ExperimentConfig
from lrd.data import Case
from lrd.experiment import run_experiment
from lrd.models import ExperimentRun
from lrd.training import InitScheme
from lrd.utils import parse_number_list

logger = logging.getLogger("experiment")

# flag -> config key
FLAGS = {
    "dataset": "dataset",
    "schema": "schema",
    "case": "case",
    "splits": "splits",
    "a": "a",
    "epochs": "epochs",
    "fits": "fits",
    "phase1_fits": "phase1_fits",
    "learning_rate": "learning_rate",
    "init_scheme": "init_scheme",
    "m_obs": "m_obs",
    "m_obs_candidates": "m_obs_candidates",
    "disparity_nodes": "disparity_nodes",
    "seed": "master_seed",
    "jobs": "jobs",
    "output_dir": "output_dir",
    "name": "name",
}


class Command(BaseCommand):
    help = "run a train/test experiment over several splits and write a report."

    def add_arguments(self, parser):
        parser.add_argument("--config", help="key=value experiment config file.")
        parser.add_argument("--dataset", help="generator name or dataset csv.")
        parser.add_argument("--schema", help="schema for a raw dataset csv.")
        parser.add_argument("--case", type=Case, choices=list(Case))
        parser.add_argument("--splits", type=int)
        parser.add_argument("--a", type=float, help="disparity loss weight.")
        parser.add_argument("--epochs", type=int)
        parser.add_argument("--fits", type=int)
        parser.add_argument("--phase1-fits", type=int)
        parser.add_argument("--learning-rate", type=float)
        parser.add_argument("--init-scheme", type=InitScheme, choices=list(InitScheme))
        parser.add_argument("--m-obs", type=int)
        parser.add_argument(
            "--m-obs-candidates",
            type=parse_number_list,
            help="comma separated candidates for cross-validation.",
        )
        parser.add_argument("--disparity-nodes", type=int)
        parser.add_argument("--seed", type=int, help="master seed.")
        parser.add_argument("--jobs", type=int, help="fits trained in parallel.")
        parser.add_argument("--output-dir")
        parser.add_argument("--name")

    def handle(self, *args, **options):
        overrides = {key: options[flag] for flag, key in FLAGS.items()}
        try:
            config = ExperimentConfig.load(options["config"], overrides)
        except ConfigError as exc:
            raise CommandError(f"{exc}")

        run = ExperimentRun.objects.create(
            name=config.name,
            dataset=config.dataset,
            case=config.case.value if config.case else "",
            master_seed=config.master_seed,
            splits=config.splits,
        )
        logger.info(f"{run} started, report in {config.report_dir()}")
        outcome = run_experiment(config, run)
        for name, path in outcome.paths.items():
            self.stdout.write(f"{name}: {path}")
        if outcome.failed:
            raise CommandError(
                f"{len(outcome.failures)} split(s) failed, see {outcome.paths['failures']}",
                returncode=1,
            )
        logger.info(f"{run} finished.")
