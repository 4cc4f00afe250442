#!/usr/bin/env python3
# Project llm4sd - Copyright 2026 The llm4sd Authors.
# SPDX-License-Identifier: Apache-2.0
"""Builds the desk-scale dataset fixtures under tests/fixtures.

Inputs come from the datamol package data directory (Apache-2.0), which
redistributes ChEMBL approved-drug structures, the FreeSolv set and an
aqueous-solubility set. RDKit normalizes every structure to aromatic SMILES.

    python3 tools/oracle/make_fixtures.py /path/to/datamol/data tests/fixtures
"""
import csv
import random
import sys
from pathlib import Path

import pandas as pd
from rdkit import Chem, RDLogger

RDLogger.DisableLog("rdApp.*")

# 1 = reaches the CNS at pharmacologically relevant levels, 0 = does not.
PENETRANT = """
alprazolam diazepam lorazepam clonazepam midazolam triazolam oxazepam temazepam
chlordiazepoxide flurazepam estazolam quazepam clobazam amitriptyline
nortriptyline imipramine desipramine clomipramine doxepin protriptyline
trimipramine amoxapine maprotiline fluoxetine sertraline paroxetine citalopram
escitalopram fluvoxamine venlafaxine desvenlafaxine duloxetine bupropion
mirtazapine trazodone nefazodone vortioxetine vilazodone haloperidol
chlorpromazine fluphenazine perphenazine thioridazine trifluoperazine
prochlorperazine promethazine thiothixene loxapine clozapine olanzapine
quetiapine risperidone paliperidone ziprasidone aripiprazole brexpiprazole
cariprazine lurasidone asenapine iloperidone pimozide molindone droperidol
morphine codeine hydromorphone oxycodone oxymorphone hydrocodone methadone
fentanyl sufentanil alfentanil remifentanil meperidine tramadol tapentadol
buprenorphine butorphanol nalbuphine naloxone naltrexone pentazocine levorphanol
propofol ketamine etomidate methohexital phenobarbital pentobarbital
secobarbital butalbital phenytoin carbamazepine oxcarbazepine eslicarbazepine
lamotrigine ethosuximide methsuximide felbamate topiramate zonisamide
levetiracetam brivaracetam lacosamide primidone rufinamide perampanel
tiagabine pregabalin gabapentin amphetamine dextroamphetamine methamphetamine
methylphenidate dexmethylphenidate modafinil armodafinil caffeine nicotine
atomoxetine donepezil galantamine rivastigmine memantine selegiline rasagiline
safinamide amantadine ropinirole pramipexole rotigotine benztropine
trihexyphenidyl biperiden zolpidem zaleplon eszopiclone suvorexant ramelteon
buspirone hydroxyzine diphenhydramine doxylamine meclizine cyclizine
scopolamine physostigmine dextromethorphan cyclobenzaprine tizanidine
carisoprodol meprobamate orphenadrine flumazenil riluzole tetrabenazine
varenicline clonidine guanfacine dexmedetomidine metoclopramide phenelzine
tranylcypromine isocarboxazid lidocaine mepivacaine bupivacaine ropivacaine
halothane isoflurane sevoflurane desflurane enflurane chloral hydrate
ethchlorvynol acetophenazine mesoridazine chlorprothixene pimavanserin
tasimelteon lemborexant cenobamate valbenazine deutetrabenazine istradefylline
opicapone entacapone tolcapone cyproheptadine carbinoxamine clemastine
chlorpheniramine brompheniramine dimenhydrinate trimethobenzamide mianserin
levomilnacipran milnacipran solriamfetol pitolisant lofexidine ezogabine
""".split()

NON_PENETRANT = """
amoxicillin ampicillin penicillin g cefazolin ceftriaxone cefuroxime cefotaxime
ceftazidime cefepime cephalexin cefaclor cefoxitin cefdinir cefixime
cefpodoxime piperacillin ticarcillin oxacillin dicloxacillin nafcillin
meropenem imipenem ertapenem doripenem aztreonam gentamicin tobramycin amikacin
streptomycin neomycin kanamycin neostigmine pyridostigmine glycopyrrolate
ipratropium tiotropium methscopolamine atracurium cisatracurium vecuronium
pancuronium rocuronium succinylcholine trospium ambenonium edrophonium
enalapril enalaprilat lisinopril captopril ramipril quinapril benazepril
fosinopril moexipril perindopril trandolapril losartan valsartan irbesartan
candesartan telmisartan olmesartan eprosartan azilsartan furosemide bumetanide
hydrochlorothiazide chlorothiazide torsemide ethacrynic acid chlorthalidone
atorvastatin pravastatin rosuvastatin fluvastatin dopamine norepinephrine
epinephrine isoproterenol dobutamine atenolol nadolol sotalol methotrexate
cromolyn sulfasalazine ganciclovir cetirizine levocetirizine fexofenadine
loratadine desloratadine domperidone loperamide glipizide glyburide metformin
sitagliptin cimetidine ranitidine famotidine nizatidine penicillamine
mesalamine olsalazine probenecid digoxin doxycycline tetracycline
erythromycin azithromycin clarithromycin alendronic acid risedronic acid
ibandronic acid foscarnet fosfomycin methylnaltrexone alvimopan naloxegol
acrivastine bilastine tubocurarine nitrofurantoin cidofovir tenofovir
disoproxil acarbose miglitol linagliptin saxagliptin empagliflozin
dapagliflozin canagliflozin montelukast zafirlukast ezetimibe
bempedoic acid aliskiren amiloride triamterene acetazolamide
methazolamide bethanechol carbachol pilocarpine albuterol terbutaline
salmeterol formoterol ritodrine esmolol labetalol carvedilol metoprolol
bisoprolol nebivolol hydralazine minoxidil
""".split()

MULTIWORD = ["penicillin g", "ethacrynic acid", "alendronic acid",
             "risedronic acid", "ibandronic acid", "bempedoic acid",
             "tenofovir disoproxil", "chloral hydrate"]


def names(tokens):
    text = " ".join(tokens)
    out = []
    for m in MULTIWORD:
        if f" {m} " in f" {text} ":
            out.append(m)
            text = f" {text} ".replace(f" {m} ", " ").strip()
    out.extend(text.split())
    return out


def canonical(smiles):
    mol = Chem.MolFromSmiles(smiles)
    if mol is None:
        return None
    frags = Chem.GetMolFrags(mol, asMols=True)
    mol = max(frags, key=lambda f: f.GetNumHeavyAtoms())
    return Chem.MolToSmiles(mol)


def bbbp(data, out):
    d = pd.read_parquet(data / "chembl_approved_drugs.parquet")
    d = d[d.molecule_type == "Small molecule"].dropna(subset=["smiles", "pref_name"])
    by_name = {n.lower(): s for n, s in zip(d.pref_name, d.smiles)}
    rows, missing = [], []
    for label, group in ((1, names(PENETRANT)), (0, names(NON_PENETRANT))):
        for name in group:
            smi = by_name.get(name)
            can = canonical(smi) if smi else None
            if can is None:
                missing.append(name)
                continue
            rows.append((name, label, can))
    random.Random(2039).shuffle(rows)
    rows = rows[:298]
    # Two malformed records, as found in public copies of the benchmark.
    rows.append(("corrupt_record_1", 1, "CN1CCN(CC1)c1ccc(cc1"))
    rows.append(("corrupt_record_2", 0, "OC(=O)C1=CC=CC=C1C(=O)OC2C3CC(C(C2)"))
    random.Random(2039).shuffle(rows)
    with open(out / "bbbp_fixture.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["num", "name", "p_np", "smiles"])
        for i, (name, label, smi) in enumerate(rows, 1):
            w.writerow([i, name, label, smi])
    print(f"bbbp: {len(rows)} rows, "
          f"{sum(r[1] for r in rows)} positive; missing: {missing}")


def esol(data, out, n=290):
    rows = []
    for sdf in ("solubility.train.sdf", "solubility.test.sdf"):
        for mol in Chem.SDMolSupplier(str(data / sdf)):
            if mol is None:
                continue
            rows.append((mol.GetProp("NAME"), float(mol.GetProp("SOL")),
                         Chem.MolToSmiles(mol)))
    seen, unique = set(), []
    for r in rows:
        if r[2] not in seen:
            seen.add(r[2])
            unique.append(r)
    random.Random(1128).shuffle(unique)
    pick = unique[:n]
    with open(out / "esol_fixture.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["Compound ID", "measured log solubility in mols per litre",
                    "smiles"])
        for name, sol, smi in pick:
            w.writerow([name, f"{sol:.2f}", smi])
    print(f"esol: {len(pick)} rows of {len(unique)}")


def freesolv(data, out):
    d = pd.read_csv(data / "freesolv.csv")
    d[["iupac", "smiles", "expt", "calc"]].to_csv(out / "freesolv.csv",
                                                  index=False)
    print(f"freesolv: {len(d)} rows")


def main():
    data, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    bbbp(data, out)
    esol(data, out)
    freesolv(data, out)


if __name__ == "__main__":
    main()
