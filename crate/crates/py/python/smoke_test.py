"""Smoke test for the extension module.

Build and run from the workspace root:

    cargo build --release -p modesense-py --features extension-module
    cp target/release/libmodesense.so crates/py/python/modesense.so
    python3 crates/py/python/smoke_test.py
"""
import sys
import tempfile

import modesense


def main():
    names = modesense.catalog("pooled")
    assert len(names) == 345, len(names)
    assert len(modesense.catalog("time")) == 165

    fused = modesense.fuse([0.40, 0.35, 0.1, 0.1, 0.05], (0.2, 0.8))
    assert abs(fused["posterior"][1] - 7 / 9) < 1e-12, fused
    assert fused["mode"] == "car", fused

    m = modesense.generate(duration_s=30, seed=5)
    assert len(m) == 150 and m.n_features == 345, m
    assert sorted(set(m.labels)) == ["bike", "bus", "car", "run", "walk"]

    report = modesense.cross_validate(m, k=3, seed=5, rf_trees=20, ranking_trees=20)
    print(f"3-fold hierarchical accuracy: {report['mean_accuracy']:.2f}%")
    assert report["mean_accuracy"] > 60

    model = modesense.HierarchicalModel.train(m, subset_size=40, seed=5)
    out = model.classify(m.row(0))
    assert out["mode"] in set(m.labels), out
    with tempfile.TemporaryDirectory() as d:
        model.save(d)
        again = modesense.HierarchicalModel.load(d)
        assert again.predict(m.row(7)) == model.predict(m.row(7))
        modesense.generate_traces(d + "/traces", duration_s=10, seed=1)
        assert len(modesense.extract(d + "/traces", "freq")) == 50
    est = model.benefit(m)
    print(f"benefit: P1={est['P1']:.3f} Delta={est['Delta']:.3f} threshold={est['threshold']:.3f}")
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
