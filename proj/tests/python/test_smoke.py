import math

import pytest

import simpdom

BOOK = (
    "<html><body><div><h1>Harry Potter and the Sorcerer's Stone</h1>"
    "<div><span>by</span><a>J. K. Rowling</a></div></div></body></html>"
)


def test_parse_shapes_tree():
    nodes = simpdom.parse(BOOK)
    assert nodes[0]["tag"] == "html"
    assert nodes[0]["parent"] is None
    texts = [n["text"] for n in nodes if n["text"] is not None]
    assert texts == ["Harry Potter and the Sorcerer's Stone", "by", "J. K. Rowling"]
    assert [n["dfs_position"] for n in nodes] == sorted(n["dfs_position"] for n in nodes)


def test_circles_find_partner():
    by_text = {c["text"]: c for c in simpdom.circles(BOOK)}
    rowling = by_text["J. K. Rowling"]
    assert rowling["partner"] == "by"
    assert "Harry Potter and the Sorcerer's Stone" in rowling["friends"]


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        simpdom.circles(BOOK, k=0)
    with pytest.raises(simpdom.SimpdomError):
        simpdom.parse("")


def test_page_f1_example():
    gold = {"title": ["A"], "author": ["B"], "price": ["C"]}
    assert math.isclose(simpdom.page_f1({"title": "A", "author": "X"}, gold), 0.4)


def test_seed_split_is_deterministic():
    sites = ["a", "b", "c", "d"]
    train, test = simpdom.seed_split(sites, 1, 7)
    assert len(train) == 1 and sorted(train + test) == sites
    assert simpdom.seed_split(sites, 1, 7) == (train, test)


def test_synth_shape():
    v = simpdom.synth("book", sites=2, pages=3, seed=1)
    assert v["attributes"] == ["title", "author", "isbn"]
    assert len(v["sites"]) == 2
    assert all(len(pages) == 3 for pages in v["sites"].values())


def test_train_extract_round_trip(tmp_path):
    simpdom.write_synth(tmp_path, "book", sites=2, pages=8, seed=2)
    config = {"epochs": 3, "d_w": 16, "d_c": 8, "cnn_filters": 8, "lstm_hidden": 12,
              "d_xpath": 8, "d_leaf": 8, "d_pos": 4, "mlp_hidden": 24, "seed": 3}
    sites = sorted(p.name for p in (tmp_path / "book").iterdir() if p.is_dir())
    model = simpdom.train(tmp_path, "book", sites[:1], config)
    assert model.attributes == ["title", "author", "isbn"]
    assert model.config["epochs"] == 3
    score = model.evaluate(tmp_path, "book", sites[1:])
    assert 0.0 <= score <= 1.0

    path = tmp_path / "book.ckpt"
    model.save(path)
    loaded = simpdom.load(path)
    page = simpdom.synth("book", sites=1, pages=1, seed=9)
    html = next(iter(page["sites"].values()))[0]["html"]
    assert loaded.extract(html) == model.extract(html)
