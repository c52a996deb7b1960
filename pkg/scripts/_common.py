import csv
import sys


def write_csv(rows, path=None):
    if not rows:
        return
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if path:
            out.close()


def int_list(text):
    return [int(x) for x in text.split(",") if x]
