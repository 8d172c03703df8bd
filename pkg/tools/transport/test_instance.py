import json
from fractions import Fraction

import pytest

from .instance import (
    GeneratorConfig,
    InstanceFormatException,
    OnlineInstance,
    enumerate_sequences,
    enumerate_small_trees,
    generate,
    load_instance,
    normalize,
    parse_instance,
    save_instance,
    serialize_instance,
)
from .metric import MetricSpace, WeightedTree

P3_JSON = """{
  "kind": "OMT_S2",
  "n": 3,
  "edges": [[0, 1, "1"], [1, 2, "2"]],
  "sites": [0, 1, 2],
  "capacities": [1, 1, 1],
  "requests": [2, 2, 2]
}
"""


def p3():
    return WeightedTree.from_edges(3, [(0, 1, 1), (1, 2, 2)])


def test_parse_tree_instance():
    instance = parse_instance(P3_JSON)
    assert instance.kind == "OMT_S2"
    assert instance.geometry == p3()
    assert instance.requests == (2, 2, 2)
    assert instance.n == 3 and instance.m == 3 and instance.k == 3
    assert instance.is_tree
    assert instance.requests_on_sites()


def test_parse_metric_instance_with_exact_strings():
    doc = {
        "kind": "OTR",
        "n": 2,
        "dist": [["0", "3/2"], ["3/2", "0"]],
        "sites": [0],
        "capacities": [2],
        "requests": [1, 0],
        "seed": 7,
    }
    instance = parse_instance(json.dumps(doc))
    assert instance.geometry.distance(0, 1) == Fraction(3, 2)
    assert instance.seed == 7
    assert instance.capacity_of(0) == 2


def test_serialization_is_canonical():
    instance = parse_instance(P3_JSON)
    text = serialize_instance(instance)
    assert parse_instance(text) == instance
    assert serialize_instance(parse_instance(text)) == text
    assert '"edges": [\n    [\n      0,\n      1,\n      "1"\n    ]' in text


def test_save_and_load(tmpdir):
    instance = parse_instance(P3_JSON)
    path = str(tmpdir.join("p3.json"))
    save_instance(instance, path)
    assert load_instance(path) == instance


def test_load_missing_file():
    with pytest.raises(InstanceFormatException) as e:
        load_instance("__SHOULD_NOT_EXIST__.json")
    assert "Cannot read instance __SHOULD_NOT_EXIST__.json" in str(e.value)


def test_digest_ignores_seed():
    instance = parse_instance(P3_JSON)
    seeded = OnlineInstance(
        instance.geometry, instance.sites, instance.capacities, instance.requests, "OMT_S2", 3
    )
    assert seeded.digest() == instance.digest()
    assert len(instance.digest()) == 64
    assert instance.with_requests([0, 1, 2]).digest() != instance.digest()


@pytest.mark.parametrize(
    "change,message",
    [
        ({"requests": [2, 2]}, "Total capacity 3 does not match the 2 requests"),
        ({"kind": "nosuch"}, "Unknown instance kind 'nosuch'"),
        ({"sites": [0, 1, 3]}, "Site 3 out of range [0, 3)"),
        ({"sites": [0, 0, 1]}, "Duplicate server sites"),
        ({"capacities": [1, 2, 0], "requests": [0, 1, 1]}, "Capacities must be integers >= 1"),
        ({"capacities": [1, "1", 1]}, "Field 'capacities' must hold integers"),
        ({"n": 0}, "Field 'n' must be a positive integer"),
        ({"dist": [[0]]}, "exactly one of 'edges' or 'dist'"),
        ({"edges": [[0, 1, "1"], [1, 2, "3"]]}, "OMT_S2 needs a power-of-two weighted tree"),
        ({"edges": [[0, 1, "1"], [1, 2, "-2"]]}, "Invalid geometry"),
        ({"edges": [5, [1, 2, "2"]]}, "Every edge must be a [u, v, weight] list, got 5"),
        ({"edges": [[0, 1], [1, 2, "2"]]}, "Every edge must be a [u, v, weight] list"),
        ({"edges": [[0, "1", "1"], [1, 2, "2"]]}, "Edge endpoints must be integers"),
        ({"edges": [[0, 1, 1.5], [1, 2, "2"]]}, "Field 'edges' must hold integers or"),
    ],
)
def test_parse_errors(change, message):
    doc = json.loads(P3_JSON)
    doc.update(change)
    with pytest.raises(InstanceFormatException) as e:
        parse_instance(json.dumps(doc))
    assert message in str(e.value)


@pytest.mark.parametrize(
    "dist,message",
    [
        ([0, 1], "Every 'dist' row must be a list of 2 entries, got 0"),
        ([[0, 1], [1]], "Every 'dist' row must be a list of 2 entries"),
        ([[0, 1], [1, None]], "Field 'dist' must hold integers or"),
        ([[0, 1]], "Field 'dist' must be an 2x2 matrix"),
    ],
)
def test_parse_rejects_malformed_distances(dist, message):
    doc = {"kind": "OTR", "n": 2, "dist": dist, "sites": [0], "capacities": [1], "requests": [1]}
    with pytest.raises(InstanceFormatException) as e:
        parse_instance(json.dumps(doc))
    assert message in str(e.value)


def test_parse_rejects_bad_json():
    with pytest.raises(InstanceFormatException) as e:
        parse_instance("{")
    assert "not valid JSON" in str(e.value)

    with pytest.raises(InstanceFormatException) as e:
        parse_instance("[]")
    assert "must be a JSON object" in str(e.value)

    with pytest.raises(InstanceFormatException) as e:
        parse_instance('{"kind": "OTR"}')
    assert "missing field 'n'" in str(e.value)


def test_kind_invariants():
    with pytest.raises(InstanceFormatException) as e:
        OnlineInstance(p3(), [0, 1], [2, 1], [0, 0, 1], kind="OMM")
    assert "OMM instances need unit capacities" in str(e.value)

    with pytest.raises(InstanceFormatException) as e:
        OnlineInstance(p3(), [0, 1], [1, 1], [0, 2], kind="OMM_S")
    assert "requests must lie on server sites" in str(e.value)

    with pytest.raises(InstanceFormatException) as e:
        OnlineInstance(p3(), [0, 1], [1, 1], [0, 1], kind="OMT_S2")
    assert "server on every vertex" in str(e.value)


def test_normalize():
    space, scale = normalize(MetricSpace([[0, "1/2", 3], ["1/2", 0, 3], [3, 3, 0]]))
    assert scale == Fraction(1, 2)
    assert space.distance(0, 2) == 6
    assert space.min_distance() == 1

    space, scale = normalize(MetricSpace([[0, 1], [1, 0]]))
    assert scale == 1
    assert space.distance(0, 1) == 1

    space, scale = normalize(MetricSpace([[0, 7], [7, 0]]))
    assert (space.distance(0, 1), scale) == (1, 7)

    single = MetricSpace([[0]])
    assert normalize(single) == (single, 1)


def test_enumerate_sequences():
    assert list(enumerate_sequences({0, 1}, 2)) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert list(enumerate_sequences({0, 1}, 0)) == [()]
    sequences = list(enumerate_sequences([2, 1, 0], 3))
    assert len(sequences) == 27
    assert sequences[0] == (0, 0, 0)
    assert sequences[-1] == (2, 2, 2)


def test_enumerate_small_trees():
    assert [list(t.edges()) for t in enumerate_small_trees(2, {0})] == [[(1, 0, 1)]]
    assert len(list(enumerate_small_trees(3, {0}))) == 3
    trees = list(enumerate_small_trees(4, {0, 1}))
    assert len(trees) == 128
    assert all(t.root == 0 and t.is_power_of_two for t in trees)


def test_enumerate_small_trees_guard():
    with pytest.raises(InstanceFormatException) as e:
        list(enumerate_small_trees(7, {0}))
    assert "1 <= n <= 6" in str(e.value)


def test_generate_path_with_fixed_exponents():
    instance = generate(GeneratorConfig(shape="path", n=3, exponents=(0, 1)))
    assert instance.geometry == p3()
    assert instance.kind == "OMT_S2"
    assert instance.sites == (0, 1, 2)


def test_generate_is_deterministic():
    config = GeneratorConfig(seed=42, shape="random-tree", n=6, lo=0, hi=3)
    assert generate(config) == generate(GeneratorConfig(**config.to_json()))
    assert generate(config).digest() == generate(config).digest()


def test_generate_random_metric_is_a_metric():
    instance = generate(GeneratorConfig(seed=3, shape="random-metric", n=4))
    instance.geometry.validate()
    assert instance.kind == "OTR"
    assert not instance.is_tree


def test_generate_capacity_schemes():
    instance = generate(
        GeneratorConfig(
            seed=5,
            shape="random-metric",
            n=5,
            m=3,
            k=7,
            capacity_scheme="random",
            request_positions="off-site",
        )
    )
    assert sum(instance.capacities) == 7
    assert all(c >= 1 for c in instance.capacities)
    assert not set(instance.requests) & set(instance.sites)

    uniform = generate(
        GeneratorConfig(seed=5, shape="star", n=4, m=2, k=6, capacity_scheme="uniform")
    )
    assert uniform.capacities == (3, 3)


@pytest.mark.parametrize(
    "kwargs,message",
    [
        ({"n": 3, "m": 4}, "Need 1 <= m <= n"),
        ({"n": 3, "m": 2, "k": 3}, "Unit capacities need k == m"),
        ({"n": 3, "m": 2, "k": 5, "capacity_scheme": "uniform"}, "m to divide k"),
        ({"lo": 2, "hi": 1}, "Need 0 <= lo <= hi"),
        ({"shape": "cube"}, "Unknown shape 'cube'"),
        ({"seed": -1}, "Seed must fit in 64 bits"),
        ({"request_positions": "off-site"}, "Off-site requests need m < n"),
        ({"exponents": (0,)}, "Need 3 fixed exponents"),
    ],
)
def test_generator_config_errors(kwargs, message):
    with pytest.raises(InstanceFormatException) as e:
        GeneratorConfig(**kwargs)
    assert message in str(e.value)
