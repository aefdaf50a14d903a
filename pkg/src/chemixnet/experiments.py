"""Multi-seed family comparisons: train each family on each seeded split, report test metrics."""

from __future__ import annotations

import json
import logging
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .data_pipeline import DatasetRecord, attach_fingerprints, split_dataset
from .model_zoo import MIXED_FAMILIES, SINGLE_FAMILIES, default_spec
from .trainer import config_for, evaluate, prepare_model, train

log = logging.getLogger(__name__)


@dataclass
class FamilyResult:
    family: str
    seed: int
    value: float
    best_epoch: int
    stopped_epoch: int
    seconds: float


@dataclass
class Comparison:
    dataset: str
    metric: str
    results: list[FamilyResult] = field(default_factory=list)

    def medians(self) -> dict[str, float]:
        fams = dict.fromkeys(r.family for r in self.results)
        return {f: statistics.median(r.value for r in self.results if r.family == f) for f in fams}

    def best(self, families: Sequence[str]) -> tuple[str, float]:
        """Best family by median; lower is better for MAPE, higher for AUC."""
        med = {f: v for f, v in self.medians().items() if f in families}
        pick = max if self.metric == "auc" else min
        name = pick(med, key=med.get)
        return name, med[name]

    def mixed_beats_single(self) -> bool:
        _, mixed = self.best(MIXED_FAMILIES)
        _, single = self.best(SINGLE_FAMILIES)
        return mixed >= single if self.metric == "auc" else mixed <= single

    def to_json(self) -> str:
        return json.dumps({"dataset": self.dataset, "metric": self.metric, "medians": self.medians(),
                           "results": [asdict(r) for r in self.results]}, indent=2, sort_keys=True)


def compare_families(
    records: Sequence[DatasetRecord],
    dataset: str,
    families: Sequence[str] = SINGLE_FAMILIES + MIXED_FAMILIES,
    seeds: Sequence[int] = (0, 1, 2),
    task: str = "regression",
    **config_overrides,
) -> Comparison:
    """The split seed doubles as the initialization and batch-order seed."""
    records = attach_fingerprints(records)
    comp = Comparison(dataset, default_spec(families[0], task).metric_kind)
    for seed in seeds:
        split = split_dataset(records, seed)
        config = config_for(dataset, seed=seed, **config_overrides)
        for family in families:
            start = time.perf_counter()
            model = prepare_model(default_spec(family, task), records, seed)
            model, hist = train(model, split, config)
            report = evaluate(model, split.test, dataset=dataset, seed=seed)
            res = FamilyResult(family, seed, report.value, hist.best_epoch, hist.stopped_epoch,
                               time.perf_counter() - start)
            log.info("%s seed %d: %s %.4f (best epoch %d, %.0f s)", family, seed, report.metric, report.value,
                     hist.best_epoch, res.seconds)
            comp.results.append(res)
    return comp
