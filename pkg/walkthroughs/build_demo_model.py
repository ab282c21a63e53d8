"""Regenerate src/bdi/data/demo_model.json (the model `bdi scan` uses by default)."""

import sys
from pathlib import Path

from bdi.fixtures import train_demo_model
from bdi.learn import model_id, save_model

out = Path(sys.argv[1]) if len(sys.argv) > 1 else \
    Path(__file__).resolve().parents[1] / "src" / "bdi" / "data" / "demo_model.json"
model = train_demo_model()
save_model(model, out)
print("wrote", out, "id", model_id(model))
