#!/usr/bin/env python3
# Project llm4sd - Copyright 2026 The llm4sd Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes tests/fixtures/descriptor_oracle.csv from RDKit.

Molecules are a seeded sample of the dataset fixtures plus a few hand picks.
mw is recomputed from data/elements.txt so the oracle and the library agree on
atomic masses; everything else is RDKit's own value.

    python3 tools/oracle/make_descriptor_oracle.py [--compare build/dump.tsv]

With --compare, reads a TSV of library values (smiles then the seven columns)
and prints the largest deviation per descriptor instead of writing the CSV.
"""
import argparse
import csv
import random
from pathlib import Path

from rdkit import Chem, RDLogger
from rdkit.Chem import Crippen, rdMolDescriptors

RDLogger.DisableLog("rdApp.*")

ROOT = Path(__file__).resolve().parents[2]
FIXTURES = ROOT / "tests" / "fixtures"
COLUMNS = ["mw", "hbd", "hba", "ring_count", "rotatable_bonds", "tpsa", "clogp"]

HAND_PICKED = [
    "CC(=O)Oc1ccccc1C(=O)O",           # aspirin
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",      # caffeine
    "CC(C)Cc1ccc(C(C)C(=O)O)cc1",      # ibuprofen
    "CC(=O)Nc1ccc(O)cc1",              # paracetamol
    "C1CC1",
    "c1ccc2ccccc2c1",
    "OCC(O)CO",
    "C[N+](C)(C)C",
    "CC(=O)[O-]",
    "N#Cc1ccccc1",
]


def masses():
    out = {}
    for line in (ROOT / "data" / "elements.txt").read_text().splitlines():
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        out[int(parts[1])] = float(parts[2])
    return out


MASS = masses()


def heavy_degree(atom):
    return sum(1 for n in atom.GetNeighbors() if n.GetAtomicNum() != 1)


def pentavalent_nitrogen(smiles):
    # RDKit rewrites N(=O)=O as [N+](=O)[O-] on input; the library does not.
    mol = Chem.MolFromSmiles(smiles, sanitize=False)
    return any(a.GetAtomicNum() == 7 and a.GetFormalCharge() == 0
               and sum(b.GetBondTypeAsDouble() for b in a.GetBonds()) > 3
               for a in mol.GetAtoms())


def rotatable(mol):
    def amide_carbon(atom):
        if atom.GetAtomicNum() != 6 or atom.GetIsAromatic():
            return False
        return any(b.GetBondType() == Chem.BondType.DOUBLE
                   and b.GetOtherAtom(atom).GetAtomicNum() == 8
                   for b in atom.GetBonds())

    n = 0
    for b in mol.GetBonds():
        if b.GetBondType() != Chem.BondType.SINGLE or b.IsInRing():
            continue
        a, c = b.GetBeginAtom(), b.GetEndAtom()
        if a.GetAtomicNum() == 1 or c.GetAtomicNum() == 1:
            continue
        if heavy_degree(a) < 2 or heavy_degree(c) < 2:
            continue
        if (a.GetAtomicNum() == 7 and amide_carbon(c)) or \
           (c.GetAtomicNum() == 7 and amide_carbon(a)):
            continue
        n += 1
    return n


def values(mol):
    mw = sum(MASS[a.GetAtomicNum()] + a.GetTotalNumHs() * MASS[1]
             for a in mol.GetAtoms())
    no = [a for a in mol.GetAtoms() if a.GetAtomicNum() in (7, 8)]
    return {
        "mw": mw,
        "hbd": sum(1 for a in no if a.GetTotalNumHs() > 0),
        "hba": len(no),
        "ring_count": len(Chem.GetSSSR(mol)),
        "rotatable_bonds": rotatable(mol),
        "tpsa": rdMolDescriptors.CalcTPSA(mol),
        "clogp": Crippen.MolLogP(mol),
    }


def corpus():
    out = []
    for name, col in (("bbbp_fixture.csv", "smiles"), ("esol_fixture.csv", "smiles"),
                      ("freesolv.csv", "smiles")):
        with open(FIXTURES / name, newline="") as f:
            out += [row[col] for row in csv.DictReader(f)]
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--compare")
    ap.add_argument("--out", default=str(FIXTURES / "descriptor_oracle.csv"))
    args = ap.parse_args()

    if args.compare:
        worst = {c: (0.0, "") for c in COLUMNS}
        with open(args.compare) as f:
            for line in f:
                parts = line.rstrip("\n").split("\t")
                mol = Chem.MolFromSmiles(parts[0])
                if mol is None or parts[1] == "ERR" or pentavalent_nitrogen(parts[0]):
                    continue
                ref = values(mol)
                for c, v in zip(COLUMNS, parts[1:]):
                    d = abs(float(v) - ref[c])
                    if d > worst[c][0]:
                        worst[c] = (d, f"{parts[0]} lib={v} ref={ref[c]}")
        for c, (d, where) in worst.items():
            print(f"{c:16s} {d:.6f} {where}")
        return

    pool = sorted({s for s in corpus()
                   if Chem.MolFromSmiles(s) is not None and not pentavalent_nitrogen(s)})
    rng = random.Random(50)
    chosen = HAND_PICKED + rng.sample([s for s in pool if s not in HAND_PICKED],
                                      50 - len(HAND_PICKED))
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["smiles"] + COLUMNS)
        for s in chosen:
            v = values(Chem.MolFromSmiles(s))
            w.writerow([s] + [f"{v[c]:.6f}" if isinstance(v[c], float) else v[c]
                              for c in COLUMNS])


if __name__ == "__main__":
    main()
