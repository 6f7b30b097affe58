#!/usr/bin/env python3
"""Write data/wdbc.data in UCI WDBC layout from scikit-learn's bundled copy.

scikit-learn ships the 569 WDBC records without the patient id column, with
the target encoded as 0 = malignant, 1 = benign. The numeric tokens are copied
verbatim; ids are the 1-based row number. Drop the original UCI `wdbc.data`
into data/ instead if you have it: the tools only rely on labels and features.
"""

import argparse
import pathlib

import sklearn


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "wdbc.data"))
    args = parser.parse_args()

    src = pathlib.Path(sklearn.__file__).parent / "datasets" / "data" / "breast_cancer.csv"
    rows = src.read_text().strip().split("\n")[1:]
    out = []
    for row_id, row in enumerate(rows, start=1):
        tokens = row.split(",")
        assert len(tokens) == 31, row
        diagnosis = "M" if tokens[30] == "0" else "B"
        out.append(",".join([str(row_id), diagnosis] + tokens[:30]))
    pathlib.Path(args.out).write_text("\n".join(out) + "\n")


if __name__ == "__main__":
    main()
