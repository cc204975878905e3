import subprocess
import sys
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent.parent
GEN_SYNTHETIC = REPO_ROOT / "scripts" / "gen_synthetic.py"


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    subprocess.run(
        [sys.executable, str(GEN_SYNTHETIC), "--out", str(out)],
        check=True,
        capture_output=True,
    )
    return out


@pytest.fixture(scope="session")
def checkpoint(synth_dir, tmp_path_factory):
    from refscorer.model import save_checkpoint, train

    model, val_ppl = train(str(synth_dir / "corpus.txt"), epochs=20, seed=0)
    path = tmp_path_factory.mktemp("ckpt") / "tiny.pt"
    save_checkpoint(str(path), model, val_ppl, seed=0)
    return path
