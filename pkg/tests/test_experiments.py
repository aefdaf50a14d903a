

from chemixnet.data_pipeline import ColumnSchema, load_dataset, subsample
from chemixnet.experiments import Comparison, FamilyResult, compare_families


def _comp(metric, values):
    comp = Comparison("toy", metric)
    for (family, seed), v in values.items():
        comp.results.append(FamilyResult(family, seed, v, 1, 1, 0.0))
    return comp


def test_medians_and_ordering_for_mape():
    comp = _comp("mape", {("FC", 0): 10.0, ("FC", 1): 30.0, ("FC", 2): 20.0,
                          ("CNN_x_FC", 0): 19.0, ("CNN_x_FC", 1): 5.0, ("CNN_x_FC", 2): 50.0})
    assert comp.medians() == {"FC": 20.0, "CNN_x_FC": 19.0}
    assert comp.best(("CNN_x_FC",)) == ("CNN_x_FC", 19.0)
    assert comp.mixed_beats_single()


def test_auc_prefers_higher():
    comp = _comp("auc", {("FC", 0): 0.8, ("RNN_x_FC", 0): 0.7})
    assert not comp.mixed_beats_single()


def test_compare_families_runs_end_to_end(data_dir):
    recs = subsample(load_dataset(data_dir / "freesolv.csv", ColumnSchema("smiles", "calc", "iupac")), 40, 0)
    comp = compare_families(recs, "freesolv-comp", ("FC",), seeds=(0,), max_epochs=2)
    assert [r.family for r in comp.results] == ["FC"]
    assert comp.metric == "mape" and comp.results[0].value > 0
    assert '"medians"' in comp.to_json()
