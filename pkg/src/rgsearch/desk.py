"""Scripted desk-scale pipeline on the planted-signal generator.

split, one search per method, a reduced-feature search, report and explain, all
through the command-line entry point so the run exercises the same code a user does.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from .cli import main
from .data import save_schema, write_dataset
from .synthetic import PlantedSignal

DESK_SEARCHES = (("NB", 50), ("DT", 50), ("LR", 50), ("RaF", 50), ("DFNN", 20))
SUBSET_METHOD = "NB"
# planted informative columns plus two noise columns
SUBSET_FEATURES = ("x02", "x05", "x09", "x01", "x03")
TIMING_FILES = ("timing.csv", "timing.json")


@dataclass
class DeskRun:
    root: Path
    seconds: dict = field(default_factory=dict)

    @property
    def search_seconds(self) -> float:
        return sum(v for k, v in self.seconds.items() if k.startswith("search"))

    def search_dir(self, method: str, subset: bool = False) -> Path:
        return self.root / (f"{method}_RF" if subset else method)


def _step(run: DeskRun, name: str, argv: list) -> None:
    start = time.perf_counter()
    code = main([str(a) for a in argv])
    run.seconds[name] = time.perf_counter() - start
    if code != 0:
        raise RuntimeError(f"step {name} exited with status {code}")


def run_desk(root, seed: int = 0, workers: int = 1, explain_cases: int = 40,
             generator: PlantedSignal | None = None) -> DeskRun:
    """Run the whole desk pipeline under ``root``; returns per-step wall-clock seconds."""
    root = Path(root)
    gen = generator or PlantedSignal(seed=seed)
    data_dir = root / "data"
    data_dir.mkdir(parents=True, exist_ok=True)
    save_schema(gen.schema(), data_dir / "schema.json")
    write_dataset(gen.generate(), data_dir / "planted.csv")
    (data_dir / "subset.txt").write_text("\n".join(SUBSET_FEATURES) + "\n")

    run = DeskRun(root)
    common = ["--seed", seed, "--workers", workers]
    _step(run, "split", ["split", "--data", data_dir / "planted.csv", "--schema", data_dir / "schema.json",
                         "--out", root / "split", *common])
    for method, n in DESK_SEARCHES:
        _step(run, f"search {method}", ["search", "--split", root / "split", "--method", method,
                                        "--n-hypes", n, "--out", run.search_dir(method), *common])
    _step(run, f"search {SUBSET_METHOD}_RF",
          ["search", "--split", root / "split", "--method", SUBSET_METHOD, "--n-hypes", 50,
           "--features", data_dir / "subset.txt", "--out", run.search_dir(SUBSET_METHOD, True), *common])
    inputs = [run.search_dir(m) for m, _ in DESK_SEARCHES] + [run.search_dir(SUBSET_METHOD, True)]
    _step(run, "report", ["report", *inputs, "--out", root / "report", *common])
    _step(run, "explain", ["explain", "--search", run.search_dir(SUBSET_METHOD), "--max-cases", explain_cases,
                           "--out", root / "explain", *common])
    return run


def output_tree(root) -> dict:
    """Relative path -> bytes for every deterministic output file."""
    root = Path(root)
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*"))
            if p.is_file() and p.name not in TIMING_FILES}
