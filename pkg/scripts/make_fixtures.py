"""Regenerate the reference model files and golden sweep CSVs under tests/.

    python scripts/make_fixtures.py

Model files come straight from ``timescale_lift.reference_models``; the
golden CSVs are the output of the ``sweep`` subcommand on those files.
"""

from pathlib import Path

from timescale_lift.cli import main
from timescale_lift.modelfile import dump_model
from timescale_lift.reference_models import example1_model, example2_coarse

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def build(out_dir=FIXTURES):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ex1, ex2 = out_dir / "example1_ct.json", out_dir / "example2_coarse.json"
    dump_model(example1_model(), ex1, {"name": "example1", "H_rule": "H[k,j] = |k-j| + 1"})
    dump_model(example2_coarse(), ex2, {"name": "example2", "fine_step": "0.5", "factor": "5"})
    main(["sweep", str(ex1), "--axis", "h", "-o", str(out_dir / "example1_sweep_h.csv")])
    main(["sweep", str(ex2), "--axis", "q", "-o", str(out_dir / "example2_sweep_q.csv")])
    return out_dir


if __name__ == "__main__":
    print(f"fixtures written to {build()}")
