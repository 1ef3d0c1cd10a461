#!/usr/bin/env python3
"""Convert the raw UCI Adult training file into the 123-feature binary
encoding used by the LIBSVM ``a9a`` dataset.

Continuous attributes are cut into quantile bins (quintiles, or a zero /
nonzero split for capital gain and loss); categorical attributes are one-hot
encoded in the order listed in ``adult.names``. Unknown values ("?") leave
their attribute block empty. Labels: ``>50K`` -> +1, ``<=50K`` -> -1.

Usage: adult_to_a9a.py adult.data out_file

A copy of adult.data ships in the ``responsibly`` wheel on PyPI
(responsibly/dataset/adult/adult.data).
"""

import sys

import numpy as np

CATEGORIES = {
    "workclass": "Private, Self-emp-not-inc, Self-emp-inc, Federal-gov, Local-gov, State-gov, Without-pay, Never-worked",
    "education": "Bachelors, Some-college, 11th, HS-grad, Prof-school, Assoc-acdm, Assoc-voc, 9th, 7th-8th, 12th, Masters, 1st-4th, 10th, Doctorate, 5th-6th, Preschool",
    "marital-status": "Married-civ-spouse, Divorced, Never-married, Separated, Widowed, Married-spouse-absent, Married-AF-spouse",
    "occupation": "Tech-support, Craft-repair, Other-service, Sales, Exec-managerial, Prof-specialty, Handlers-cleaners, Machine-op-inspct, Adm-clerical, Farming-fishing, Transport-moving, Priv-house-serv, Protective-serv, Armed-Forces",
    "relationship": "Wife, Own-child, Husband, Not-in-family, Other-relative, Unmarried",
    "race": "White, Asian-Pac-Islander, Amer-Indian-Eskimo, Other, Black",
    "sex": "Female, Male",
    "native-country": "United-States, Cambodia, England, Puerto-Rico, Canada, Germany, Outlying-US(Guam-USVI-etc), India, Japan, Greece, South, China, Cuba, Iran, Honduras, Philippines, Italy, Poland, Jamaica, Vietnam, Mexico, Portugal, Ireland, France, Dominican-Republic, Laos, Ecuador, Taiwan, Haiti, Columbia, Hungary, Guatemala, Nicaragua, Scotland, Thailand, Yugoslavia, El-Salvador, Trinadad&Tobago, Peru, Hong, Holand-Netherlands",
}

# (name, kind, bins) in file column order.
COLUMNS = [
    ("age", "quantile", 5),
    ("workclass", "cat", None),
    ("fnlwgt", "quantile", 5),
    ("education", "cat", None),
    ("education-num", "quantile", 5),
    ("marital-status", "cat", None),
    ("occupation", "cat", None),
    ("relationship", "cat", None),
    ("race", "cat", None),
    ("sex", "cat", None),
    ("capital-gain", "nonzero", 2),
    ("capital-loss", "nonzero", 2),
    ("hours-per-week", "quantile", 5),
    ("native-country", "cat", None),
]


def load(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            parts = [p.strip() for p in line.strip().split(",")]
            if len(parts) != 15:
                continue
            rows.append(parts)
    return rows


def quantile_edges(values, bins):
    probs = np.linspace(0, 1, bins + 1)[1:-1]
    qs = np.unique(np.quantile(values, probs))
    if len(qs) < bins - 1:
        # Heavy ties (hours-per-week = 40): cut the distinct values instead.
        qs = np.unique(np.quantile(np.unique(values), probs))
    return qs


def main(argv):
    if len(argv) != 3:
        sys.stderr.write(__doc__)
        return 2
    rows = load(argv[1])
    blocks = []
    offset = 0
    for col, (name, kind, bins) in enumerate(COLUMNS):
        if kind == "cat":
            values = [v.strip() for v in CATEGORIES[name].split(",")]
            blocks.append((col, kind, {v: i for i, v in enumerate(values)}, offset))
            offset += len(values)
        elif kind == "quantile":
            data = np.array([float(r[col]) for r in rows])
            edges = quantile_edges(data, bins)
            blocks.append((col, kind, edges, offset))
            offset += len(edges) + 1
        else:
            blocks.append((col, kind, None, offset))
            offset += 2
    dim = offset

    with open(argv[2], "w") as out:
        for r in rows:
            label = "+1" if r[14].startswith(">50K") else "-1"
            feats = []
            for col, kind, table, base in blocks:
                v = r[col]
                if kind == "cat":
                    if v in table:
                        feats.append(base + table[v])
                elif kind == "quantile":
                    feats.append(base + int(np.searchsorted(table, float(v), side="right")))
                else:
                    feats.append(base + (1 if float(v) != 0.0 else 0))
            out.write(label + " " + " ".join(f"{i + 1}:1" for i in sorted(feats)) + "\n")
    sys.stderr.write(f"wrote {len(rows)} rows, dimension {dim}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
