#!/usr/bin/env python3
"""Smoke test for the qif_py extension module.

Build the extension first, then run the script from anywhere:

    cargo build -p qif-py
    python3 python/smoke.py

The script copies the freshest built cdylib into a temporary import root
under the name Python expects and drives the main entry points end to end.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]


def locate_cdylib():
    candidates = []
    for profile in ("debug", "release"):
        for name in ("libqif_py.so", "libqif_py.dylib", "qif_py.dll"):
            p = ROOT / "target" / profile / name
            if p.exists():
                candidates.append(p)
    if not candidates:
        sys.exit("smoke: build the extension first: cargo build -p qif-py")
    return max(candidates, key=lambda p: p.stat().st_mtime)


def main():
    lib = locate_cdylib()
    tmp = tempfile.mkdtemp(prefix="qif-py-")
    suffix = ".pyd" if lib.suffix == ".dll" else ".so"
    shutil.copy2(lib, Path(tmp) / ("qif_py" + suffix))
    sys.path.insert(0, tmp)
    import qif_py

    # parsing, rendering, evaluation
    p = qif_py.Program.parse("high h0, h1; out o;\no := h0 & h1")
    assert qif_py.Program.parse(p.render()).render() == p.render()
    assert p.high == ["h0", "h1"] and p.low == [] and p.out == ["o"]
    assert p.evaluate("11", "-") == "1"
    assert p.evaluate("01", "-") == "0"
    assert len(p.table().splitlines()) == 4

    # the guessing pair: measures and the refinement relation both ways
    intro = qif_py.corpus_intro()
    m1, m2 = intro["intro_m1"], intro["intro_m2"]
    se1 = qif_py.measure(m1, "se")
    assert abs(se1["value"] - (2 - 0.75 * math.log2(3))) < 1e-9
    assert se1["mode"] == "exact"
    assert qif_py.measure(m1, "ge")["exact"] == "3/4"
    assert qif_py.measure(m2, "me")["exact"] == "4"
    assert qif_py.measure(m2, "cc")["value"] == 2.0
    assert qif_py.check_r(m1, m2, engine="brute")["holds"]
    assert qif_py.check_r(m1, m2, engine="sat")["holds"]
    refuted = qif_py.check_r(m2, m1)
    assert not refuted["holds"]
    assert refuted["counterexample"] == {"l": "-", "h": "00", "h2": "10"}
    assert qif_py.compare(m1, m2, "se")["holds"]

    # witness distribution: the refuted side out-leaks the other on it
    w = qif_py.witness(m2, m1)
    assert w.support_len() == 2 and not w.is_uniform()
    assert qif_py.Dist.parse(w.render()).render() == w.render()
    assert abs(qif_py.measure(m2, "se", dist=w)["value"] - 1.0) < 1e-9
    assert abs(qif_py.measure(m1, "se", dist=w)["value"]) < 1e-9
    assert qif_py.measure(m2, "ge", dist=w)["exact"] == "1/2"

    # distribution constructors
    assert qif_py.Dist.uniform(m1).is_uniform()
    assert qif_py.Dist.random(m1, seed=7).render() == qif_py.Dist.random(m1, seed=7).render()

    # login family: refinement verdicts and non-interference
    login = qif_py.corpus_login(3)
    assert qif_py.check_r(login["login_m4"], login["login_spec"])["holds"]
    assert not qif_py.check_r(login["login_m1"], login["login_spec"])["holds"]
    assert not login["login_spec"].is_non_interferent()
    assert not qif_py.check_ni(login["login_spec"], engine="sat")["holds"]
    ni = qif_py.Program.parse("high h; low l; out o;\no := l")
    assert ni.is_non_interferent()
    assert qif_py.check_ni(ni, engine="sat")["holds"]

    # model counting through a leakage oracle, and the inverse generator
    run = qif_py.count("(x1 | x2) & !(x1 & x2)", oracle="me")
    assert run["count"] == 2
    assert run["oracle_calls"] <= 3 * (2 + 1) + 2
    assert qif_py.count("x1 & x2")["count"] == 1
    gen = qif_py.gen_formula(2, ["x1", "x2"])
    assert qif_py.count(gen, universe=["x1", "x2"])["count"] == 2

    # symbolic helpers
    assert qif_py.sat_model("x & !y") == {"x": True, "y": False}
    assert qif_py.sat_model("x & !x") is None
    assert qif_py.export_dimacs("x & y").startswith("c var 1 x")
    assert qif_py.export_dimacs("x & y") != qif_py.export_dimacs("x & y", negate=True)
    for text in (qif_py.wp(ni, "o"), qif_py.vc_ni(ni), qif_py.vc_r(m1, m2)):
        assert isinstance(text, str) and text
        qif_py.export_dimacs(text)  # renders back through the parser

    print(f"smoke: ok ({lib.name})")


if __name__ == "__main__":
    main()
