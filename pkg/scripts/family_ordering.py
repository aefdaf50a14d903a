"""Train all seven families over three seeded splits and compare median test metrics.

    python scripts/family_ordering.py freesolv-comp
    python scripts/family_ordering.py cep --data path/to/cep_full.csv --subsample 50000
"""

import argparse
import logging
import sys
from pathlib import Path

from chemixnet.data_pipeline import ColumnSchema, load_dataset, subsample
from chemixnet.experiments import compare_families
from chemixnet.model_zoo import MIXED_FAMILIES, SINGLE_FAMILIES

ROOT = Path(__file__).resolve().parents[1]
DATASETS = {
    "freesolv-comp": (ROOT / "data" / "freesolv.csv", ColumnSchema("smiles", "calc", "iupac")),
    "freesolv-exp": (ROOT / "data" / "freesolv.csv", ColumnSchema("smiles", "expt", "iupac")),
    "esol": (ROOT / "data" / "esol.csv",
             ColumnSchema("smiles", "measured log solubility in mols per litre", "Compound ID")),
    "cep": (ROOT / "data" / "cep_homo_sample.csv", ColumnSchema("smiles", "homo_eV")),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("dataset", choices=sorted(DATASETS))
    ap.add_argument("--data", help="override the CSV path (same columns)")
    ap.add_argument("--subsample", type=int, default=None, help="seeded subset size (seed 0)")
    ap.add_argument("--families", nargs="+", default=list(SINGLE_FAMILIES + MIXED_FAMILIES))
    ap.add_argument("--seeds", nargs="+", type=int, default=[0, 1, 2])
    ap.add_argument("--out", type=Path, default=None, help="write the comparison JSON here")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    path, schema = DATASETS[args.dataset]
    records = load_dataset(args.data or path, schema)
    if args.subsample:
        records = subsample(records, args.subsample, 0)
    comp = compare_families(records, args.dataset, args.families, args.seeds)
    for fam, med in comp.medians().items():
        print(f"{fam:14s} median {comp.metric} {med:.4f}")
    if args.out:
        args.out.write_text(comp.to_json() + "\n")
    if set(args.families) & set(MIXED_FAMILIES) and set(args.families) & set(SINGLE_FAMILIES):
        mixed, single = comp.best(MIXED_FAMILIES), comp.best(SINGLE_FAMILIES)
        print(f"best mixed {mixed[0]} {mixed[1]:.4f}; best single {single[0]} {single[1]:.4f}")
        return 0 if comp.mixed_beats_single() else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
