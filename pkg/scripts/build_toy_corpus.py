"""Write a small conversation CSV in the ingest format.

Conversations cycle through the emotion catalog with speaker/listener
parity on even/odd turns, which is enough to exercise every pipeline
stage without real data.
"""

import argparse
from pathlib import Path

from cheerbot.catalog import load_default_catalog
from cheerbot.synthetic import ed_style_records, write_ed_csv


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("toy_ed.csv"))
    parser.add_argument("--n-convs", type=int, default=60)
    parser.add_argument("--turns-per-conv", type=int, default=4)
    args = parser.parse_args(argv)

    catalog = load_default_catalog()
    records = ed_style_records(catalog, n_convs=args.n_convs,
                               turns_per_conv=args.turns_per_conv)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_ed_csv(records, args.out)
    print(f"wrote {len(records)} utterances ({args.n_convs} conversations) to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
