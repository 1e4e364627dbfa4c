"""Records data/cassettes/replay.jsonl and data/experiment/items.jsonl with canned responses.

Usage: python tools/data/make_replay_fixtures.py path/to/conlang
"""
import json
import os
import pathlib
import random
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[2]
CONFIG = ROOT / "data/configs/replay.json"
CASSETTE = ROOT / "data/cassettes/replay.jsonl"
ITEMS = ROOT / "data/experiment/items.jsonl"
N_ITEMS = 8


def run(cli, verb, responses):
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
        json.dump(responses, f, ensure_ascii=False)
    env = dict(os.environ, CONLANG_LLM_MODE="record", CONLANG_LLM_PROVIDER="scripted", CONLANG_LLM_SCRIPT=f.name)
    subprocess.run([cli, verb, "-c", str(CONFIG)], check=True, env=env)
    os.unlink(f.name)


def garble(words, rng, keep):
    out = [w if rng.random() < keep else "".join(rng.sample(w, len(w))) for w in words]
    if len(out) > 2 and rng.random() < 0.5:
        i = rng.randrange(len(out) - 1)
        out[i], out[i + 1] = out[i + 1], out[i]
    return out


def main():
    cli = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "build/tools/conlang")
    cfg = json.loads(CONFIG.read_text())
    out_dir = (CONFIG.parent / cfg["output_dir"]).resolve() / cfg["build_id"]

    full = json.loads((ROOT / "data/grammars/welshish.json").read_text())
    first = json.loads(json.dumps(full))
    del first["consonants"]["ɬ"]
    CASSETTE.parent.mkdir(parents=True, exist_ok=True)
    CASSETTE.unlink(missing_ok=True)
    subprocess.run(["rm", "-rf", str(out_dir)], check=True)
    ITEMS.parent.mkdir(parents=True, exist_ok=True)
    ITEMS.write_text("")

    handbook = "# Handbook\n\nThe language is written left to right. Words are built from a stem and suffixes.\n"
    run(cli, "build", [json.dumps(first, ensure_ascii=False), json.dumps(full, ensure_ascii=False), handbook])

    records = [json.loads(l) for l in (out_dir / "corpus.jsonl").read_text().splitlines() if l.strip()]
    items = []
    for i, r in enumerate(records[:N_ITEMS]):
        items.append({"id": f"x{i + 1:02d}", "source": r["source_text"], "annotation": r["gloss"],
                      "reference": r["orthographic"]})
    ITEMS.write_text("".join(json.dumps(it, ensure_ascii=False) + "\n" for it in items))

    rng = random.Random(20240611)
    responses = []
    for _ in range(cfg["experiment"]["runs"]):
        for keep in (0.35, 0.8):
            for it in items:
                words = it["reference"].rstrip(".").split()
                responses.append("Translation: " + " ".join(garble(words, rng, keep)) + ".")
    run(cli, "experiment", responses)


if __name__ == "__main__":
    main()
