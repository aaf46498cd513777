import logging
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from pathlib import Path
from typing import Dict
from typing import List
from typing import Optional

from .config import ExperimentConfig
from .data import Dataset
from .data import generate
from .data import GENERATORS
from .data import inject_outcome
from .data import load_schema
from .data import preprocess
from .data import read_canonical_csv
from .data import read_raw_csv
from .data import split
from .metrics import evaluate
from .metrics import EvalReport
from .metrics import top_features
from .models import ExperimentRun
from .models import SplitResult
from .network import ArchitectureConfig
from .reporter import Reporter
from .training import FitResult
from .training import kfold_select_m_obs
from .training import train_phase1
from .training import train_phase2
from .utils import derive_seed
from .utils import handle_exception
from .utils import STREAM_INIT
from .utils import STREAM_OUTCOME
from .utils import STREAM_SPLIT

logger = logging.getLogger(__name__)


@dataclass
class SplitOutcome:
    split: int
    m_obs: int
    phase1: FitResult
    phase2: FitResult
    report: EvalReport


@dataclass
class ExperimentOutcome:
    report_dir: Path
    splits: List[SplitOutcome] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)
    paths: Dict[str, Path] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return bool(self.failures)


def load_dataset(config: ExperimentConfig) -> Dataset:
    if config.is_generated:
        return generate(GENERATORS[config.dataset], config.n, config.master_seed)
    path = config.dataset_path()
    schema = config.schema_path()
    if schema:
        logger.info(f"preprocessing {path} with {schema}")
        return preprocess(read_raw_csv(path), load_schema(schema))
    return read_canonical_csv(path)


def prepare_dataset(config: ExperimentConfig) -> Dataset:
    """Load the dataset and draw the configured outcome on all rows."""
    dataset = load_dataset(config)
    outcome = config.outcome_case()
    if outcome is not None:
        seed = derive_seed(config.master_seed, STREAM_OUTCOME)
        dataset = inject_outcome(dataset, outcome, seed)
    logger.info(f"dataset ready: {dataset!r}")
    return dataset


def _case_label(config: ExperimentConfig) -> str:
    return config.case.value if config.case else ""


def run_split(
    config: ExperimentConfig,
    dataset: Dataset,
    index: int,
    reporter: Reporter,
) -> SplitOutcome:
    train, test = split(
        dataset,
        config.train_fraction,
        derive_seed(config.master_seed, STREAM_SPLIT, index),
    )
    seed = derive_seed(config.master_seed, STREAM_INIT, index)
    phase1_config = replace(config.train_config(phase1=True), master_seed=seed)
    phase2_config = replace(config.train_config(), master_seed=seed)

    m_obs = config.m_obs
    if m_obs is None:
        selection = kfold_select_m_obs(
            train,
            config.m_obs_candidates,
            config.folds,
            phase1_config,
        )
        m_obs = selection.m_obs
        if selection.scores:
            reporter.write_series(
                index,
                "m_obs_loss",
                [(s.m_obs, s.validation_loss) for s in selection.scores],
            )
            reporter.write_series(
                index,
                "m_obs_train_loss",
                [(s.m_obs, s.train_loss) for s in selection.scores],
            )
        logger.info(f"split {index}: selected m_obs={m_obs}")
    arch = ArchitectureConfig(train.n_features, m_obs + config.disparity_nodes, m_obs)

    weights = config.loss_weights()
    fits: List[FitResult] = []
    phase1 = train_phase1(train, arch, phase1_config, weights, on_fit=fits.append)
    reporter.write_fit_log(index, "phase1", fits)
    reporter.write_params(index, "phase1_params", phase1.params)
    logger.info(
        f"split {index} phase 1 succeeded, C={phase1.final_losses.C:.4f} "
        f"D={phase1.final_losses.D:.4f}",
    )

    fits = []
    phase2 = train_phase2(train, phase1, weights, phase2_config, on_fit=fits.append)
    reporter.write_fit_log(index, "phase2", fits)
    reporter.write_params(index, "params", phase2.params)
    reporter.write_series(
        index,
        "loss_curve",
        zip(phase2.epochs_logged, [loss.total for loss in phase2.history]),
    )
    features = top_features(phase2.params, train.feature_names)
    reporter.write_lines(
        index,
        "top_features.txt",
        [f"{name}\t{weight!r}" for name, weight in features],
    )
    logger.info(
        f"split {index} phase 2 succeeded, A={phase2.final_losses.A:.4f} "
        f"B={phase2.final_losses.B:.4f}",
    )

    report = evaluate(phase2.params, test)
    losses = phase2.final_losses
    reporter.add_split(
        {
            "dataset": config.dataset,
            "case": _case_label(config),
            "split": index,
            "disparity": report.disparity,
            "accuracy": report.accuracy,
            "A": losses.A,
            "B": losses.B,
            "C": losses.C,
            "D": losses.D,
        },
        report.as_row(config.dataset, _case_label(config), index),
    )
    return SplitOutcome(index, m_obs, phase1, phase2, report)


def _record_split(run: ExperimentRun, outcome: SplitOutcome) -> None:
    losses = outcome.phase2.final_losses
    SplitResult.objects.create(
        run=run,
        split=outcome.split,
        m_obs=outcome.m_obs,
        disparity=outcome.report.disparity,
        accuracy=outcome.report.accuracy,
        loss_a=losses.A,
        loss_b=losses.B,
        loss_c=losses.C,
        loss_d=losses.D,
        cm=outcome.report.cm,
        logit_shift=outcome.report.logit_shift,
    )


def run_experiment(
    config: ExperimentConfig,
    run: Optional[ExperimentRun] = None,
) -> ExperimentOutcome:
    """
    Run every split of ``config``. A failing split is logged and recorded,
    and the remaining splits still run.
    """
    reporter = Reporter(config.report_dir())
    reporter.write_config(config.to_text())
    outcome = ExperimentOutcome(report_dir=reporter.root)
    if run:
        run.output_dir = str(reporter.root)
        run.config = config.to_text()
        run.start()

    try:
        dataset = prepare_dataset(config)
    except Exception as exc:
        message = handle_exception(exc)
        reporter.add_failure(None, message)
        outcome.failures.append(message)
        if run:
            run.set_error(message)
            run.finish()
        outcome.paths = reporter.finish(config.cm_other)
        return outcome

    for index in range(config.splits):
        try:
            result = run_split(config, dataset, index, reporter)
        except Exception as exc:
            message = handle_exception(exc)
            reporter.add_failure(index, message)
            outcome.failures.append(message)
            if run:
                SplitResult.objects.create(
                    run=run,
                    split=index,
                    failed=True,
                    message=message[:1000],
                )
                run.set_error(f"split {index}: {message}")
            continue
        outcome.splits.append(result)
        if run:
            _record_split(run, result)
        logger.info(
            f"split {index} succeeded: disparity={result.report.disparity:.4f} "
            f"accuracy={result.report.accuracy:.4f}",
        )

    outcome.paths = reporter.finish(config.cm_other)
    if run:
        run.finish()
    return outcome
