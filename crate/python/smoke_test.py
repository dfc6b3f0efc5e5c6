"""Smoke test for the magk extension module.

Uses an installed `magk` (pip install -e crates/python --no-build-isolation)
or else a cargo build of the extension:
    cargo build --release -p magk-python --features extension-module
    python3 python/smoke_test.py [path/to/libmagk_python.so]
"""

import importlib.machinery
import importlib.util
import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load(path=None):
    if path is None:
        try:
            import magk

            return magk
        except ImportError:
            pass
        names = ["libmagk_python.so", "libmagk_python.dylib", "magk_python.dll"]
        candidates = [ROOT / "target" / p / n for p in ("release", "debug") for n in names]
        found = [c for c in candidates if c.exists()]
        if not found:
            sys.exit("extension not built; run cargo build -p magk-python --features extension-module")
        path = max(found, key=lambda c: c.stat().st_mtime)
    loader = importlib.machinery.ExtensionFileLoader("magk", str(path))
    spec = importlib.util.spec_from_file_location("magk", str(path), loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    magk = load(sys.argv[1] if len(sys.argv) > 1 else None)
    print("magk", magk.__version__)

    names = magk.catalog_names()
    assert len(names) >= 10 and "c4t-sz" in names, names

    g = magk.MagneticGroup.builtin("c4t-sz", twisted=True)
    assert (g.order, g.twisted) == (16, True), g
    r = g.classify()
    assert r["counts"] == {"R": 0, "C": 2, "H": 0}, r["counts"]
    assert r["ranks"] == {"magnetic": 2, "invariants": 2}
    t = g.torus_rank()["spin_split"]
    assert (t["total_even"], t["invariant"]["rank_even"], t["invariant"]["rank_odd"]) == (12, 6, 0)

    kr = magk.MagneticGroup.builtin("kr")
    column = [row["group"] for row in kr.ktable(-7, 0)["table"]]
    assert column == ["Z", "Z/2", "Z/2", "0", "Z", "0", "0", "0"], column
    assert magk.bott("H", 0) == "Z" and magk.bott("H", -5) == "Z/2"

    d4 = magk.MagneticGroup.from_spec({"construct": "semidirect", "m": 4, "k": 2, "action": 3, "phi": "on_h"})
    assert d4.restrict()["image_invariant"] is True
    c2 = magk.MagneticGroup.from_spec({"construct": "cyclic", "m": 2})
    rank = c2.torus_rank({"0": {"A": [[1, 0], [0, 1]]}, "1": {"A": [[-1, 0], [0, -1]]}})["rank"]
    assert (rank["rank_even"], rank["rank_odd"]) == (6, 0), rank

    try:
        magk.MagneticGroup.from_spec({"construct": "cyclic", "m": 4, "phi": "sideways"})
    except ValueError as e:
        assert "/group/phi" in str(e), e
    else:
        raise AssertionError("bad phi accepted")

    m = magk.Model.builtin_c4t(1.0)
    z = m.z2(mesh=24)
    assert (z["total"], abs(z["spin_up"]), z["z2_parity"]) == (0, 1, 1), z
    assert m.perturbed(0.1, seed=7).z2(mesh=24)["z2_parity"] == 1
    h = m.hamiltonian(0.0, 0.0)
    assert len(h) == 4 and abs(h[0][0] - 3.0) < 1e-12
    again = magk.Model.from_spec(m.spec())
    assert again.chern(mesh=24)["total"] == 0
    assert magk.Model.builtin_c4t(3.0).z2(mesh=24)["z2_parity"] == 0
    try:
        magk.Model.builtin_c4t(2.0).z2(mesh=24)
    except ArithmeticError:
        pass
    else:
        raise AssertionError("gap closing not reported")

    report = magk.verify_all()
    assert report["all_pass"], report["failed"]
    print("smoke test passed:", len(report["checks"]), "checks")


if __name__ == "__main__":
    main()
