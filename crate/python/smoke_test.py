"""Smoke test for the ldc_py extension.

Build first: cargo build -p ldc-py --features extension-module --release
"""

import importlib.util
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    built = ROOT / "target" / "release" / "libldc_py.so"
    if not built.exists():
        sys.exit(f"missing {built}; build the extension first")
    dest = pathlib.Path(tempfile.mkdtemp()) / "ldc_py.so"
    shutil.copy(built, dest)
    spec = importlib.util.spec_from_file_location("ldc_py", dest)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)
    return module


ldc = load()


def test_identity_checks():
    assert ldc.check_judgment(r"\^1 x:A. x : {}^1 A -> A") == "{}^1 A -> A"


def test_duplication_rejected():
    assert ldc.check_judgment(r"\^1 x:A. (x^1, x) : {}^1 A -> {}^1 A & A") is None


def test_heap_lookup_consumes():
    end, term, heap = ldc.heap_run("x ^1 = unit", "x", grade="1")
    assert (end, term, heap.strip()) == ("value", "unit", "x ^0 = unit")
    assert ldc.heap_run("x ^0 = unit", "x", grade="1")[0] == "stuck"


def test_lnl_pair_translates():
    term, ok = ldc.translate_lnl("x : X, y : Y |- (x, y) : X * Y")
    assert ok and "x" in term and "y" in term


def test_m3_is_not_distributive():
    laws = {name: holds for name, _, holds in ldc.verify("lattice:m3")}
    assert not laws["distributive-join-over-meet"]
    assert all(holds for name, claimed, holds in ldc.verify("lin3") if claimed)


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print("ok", name)
