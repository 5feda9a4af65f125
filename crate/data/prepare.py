"""Rebuild the bundled benchmark files from wheels that vendor the UCI data.

The UCI archive itself is the canonical source (URLs in data/README.md). This
script reproduces the bundled files offline from two PyPI wheels that ship
copies of the same tables:

    pip download --no-deps common-datasets==0.3.10 orange3==3.39.0
    python3 data/prepare.py common_datasets-0.3.10-*.whl orange3-3.39.0-*.whl

Outputs (relative to this directory):
    bupa/bupa.data            345 rows, original UCI column order
    heart/cleve.data          303 rows, cleve.mod symbolic codes, comma separated
    hepatitis/hepatitis.data  155 rows, verbatim UCI file
    pima/pima-indians-diabetes.data  768 rows, UCI column order
"""

import os
import sys
import zipfile

HERE = os.path.dirname(os.path.abspath(__file__))
CD = "common_datasets/data/classification/"


def keel_rows(z, name):
    text = z.read(CD + name).decode()
    body = text.split("@data", 1)[1]
    return [[v.strip() for v in line.split(",")] for line in body.splitlines() if line.strip()]


def num(v):
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def write(rel, lines):
    path = os.path.join(HERE, rel)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"{rel}: {len(lines)} rows")


def main(common_whl, orange_whl):
    z = zipfile.ZipFile(common_whl)

    bupa = keel_rows(z, "bupa/bupa.dat")
    write("bupa/bupa.data", [",".join(num(v) for v in r) for r in bupa])

    pima = keel_rows(z, "pima/pima.dat")
    cls = {"positive": "1", "negative": "0"}
    write(
        "pima/pima-indians-diabetes.data",
        [",".join(r[:8] + [cls[r[8]]]) for r in pima],
    )

    hep = z.read(CD + "hepatitis/hepatitis.data.txt").decode().split()
    write("hepatitis/hepatitis.data", hep)

    o = zipfile.ZipFile(orange_whl)
    tab = o.read("Orange/datasets/heart_disease.tab").decode().splitlines()
    codes = {
        1: {"male": "male", "female": "fem"},
        2: {
            "typical ang": "angina",
            "atypical ang": "abnang",
            "non-anginal": "notang",
            "asymptomatic": "asympt",
        },
        5: {"1": "true", "0": "fal"},
        6: {"normal": "norm", "ST-T abnormal": "abn", "left vent hypertrophy": "hyp"},
        8: {"1": "true", "0": "fal"},
        10: {"upsloping": "up", "flat": "flat", "downsloping": "down"},
        12: {"normal": "norm", "fixed defect": "fix", "reversable defect": "rev"},
        13: {"0": "buff", "1": "sick"},
    }
    out = []
    for line in tab[3:]:
        if not line.strip():
            continue
        vals = line.split("\t")
        row = []
        for i, v in enumerate(vals):
            v = v.strip()
            if v in ("", "?"):
                row.append("?")
            elif i in codes:
                row.append(codes[i][v])
            else:
                row.append(num(v))
        out.append(",".join(row))
    write("heart/cleve.data", out)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
