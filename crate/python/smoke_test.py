"""Quick end-to-end check of the Python bindings."""

import json

import medianwalk_py as mw


def main():
    grid = mw.Complex.family('{"family": "grid", "p": 3, "q": 3}')
    assert grid.vertex_count() == 9 and grid.wall_count() == 4
    assert grid.distance(0, 8) == 4
    assert grid.median(0, 2, 6) == 0
    assert len(grid.separating_walls(0, 8)) == 4
    again = mw.Complex.from_json(grid.to_json())
    assert again.content_hash() == grid.content_hash()
    box = json.loads(grid.verify_box_lemma())
    print("box lemma:", box)

    f2 = mw.DefiningGraph.preset("f2")
    a, b = f2.element("a"), f2.element("b")
    ab = a * b
    assert str(ab * ab.inverse()) == str(f2.identity())
    assert len(ab) == 2 and ab.dist(f2.identity()) == 2
    assert a.find_rank1_witness() is not None
    assert ab.translation_length() == (2, 1)

    z2 = mw.DefiningGraph.preset("z2")
    assert z2.is_join()

    run = mw.simulate(f2, seed=7, n=2000, trials=200)
    drift, lo, hi = run.drift()
    print(f"F2 drift {drift:.4f} [{lo:.4f}, {hi:.4f}]")
    assert 0.45 < drift < 0.55
    rerun = mw.simulate(f2, seed=7, n=2000, trials=200)
    assert rerun.final_distances() == run.final_distances()

    try:
        mw.simulate(f2, 0, 10, 10, measure='{"kind": "explicit", "support": [["a", 1.0]]}')
    except ValueError as e:
        print("rejected degenerate measure:", e)
    else:
        raise AssertionError("degenerate measure accepted")

    ok, report = mw.run_suite("clt", json.dumps({"n": 500, "trials": 200, "psi": None}))
    print("clt suite passed:", ok)
    print("smoke test ok")


if __name__ == "__main__":
    main()
