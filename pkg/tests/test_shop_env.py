from __future__ import annotations

import random

import pytest

from thoughtloop import fixtures
from thoughtloop.envs.shop import Purchase, ShopEnv, ShopGoal, score_episode
from thoughtloop.trajectory import action


@pytest.fixture
def banana_goal(shop_goals):
    return shop_goals["banana-chips-16"]


@pytest.fixture
def deodorant_env(shop_catalog, shop_goals):
    env = ShopEnv(shop_catalog, shop_goals["deodorant-bright-citrus"])
    env.reset()
    return env


def test_search_ranks_curated_first(deodorant_env):
    obs = deodorant_env.execute(action(1, "search", "3 ounce bright citrus deodorant sensitive skin"))
    lines = obs.splitlines()
    assert lines[0] == "[Back to Search]"
    assert lines[1].startswith("Page 1 (Total results: ")
    first = next(l for l in lines if l.startswith("[B0"))
    assert first == "[B078GWRC1J]"


def test_click_option_phrasing(deodorant_env):
    deodorant_env.execute(action(1, "search", "3 ounce bright citrus deodorant sensitive skin"))
    deodorant_env.execute(action(2, "click", "B078GWRC1J"))
    obs = deodorant_env.execute(action(3, "click", "bright citrus"))
    assert obs == "You have clicked bright citrus."


def test_buy_now_requires_product_page(deodorant_env):
    assert deodorant_env.execute(action(1, "click", "Buy Now")) == "Nothing happens."
    assert not deodorant_env.is_done()


def test_buy_now_terminates(deodorant_env):
    deodorant_env.execute(action(1, "search", "bright citrus deodorant"))
    deodorant_env.execute(action(2, "click", "B078GWRC1J"))
    deodorant_env.execute(action(3, "click", "bright citrus"))
    deodorant_env.execute(action(4, "click", "3 ounce (pack of 1)"))
    deodorant_env.execute(action(5, "click", "Buy Now"))
    assert deodorant_env.is_done()
    result = deodorant_env.result()
    assert result["score"] == 1.0 and result["success"] is True


def test_pagination(shop_catalog, banana_goal):
    env = ShopEnv(shop_catalog, banana_goal)
    env.reset()
    obs = env.execute(action(1, "search", "classic walnut"))
    assert "[Next]" in obs
    page2 = env.execute(action(2, "click", "Next"))
    assert "Page 2 (" in page2
    assert "[Prev]" in page2
    back = env.execute(action(3, "click", "Prev"))
    assert "Page 1 (" in back


def test_click_product_not_on_page(shop_catalog, banana_goal):
    env = ShopEnv(shop_catalog, banana_goal)
    env.reset()
    env.execute(action(1, "search", "sixteen pack apple cinnamon freeze dried banana chips"))
    # A real product id that did not appear in these results is not clickable.
    assert env.execute(action(2, "click", "SYN00000")) == "Nothing happens."


def test_reference_purchase_scores(shop_catalog, banana_goal):
    raw = fixtures._load_json("replay_shop.json")
    for episode in raw["episodes"]:
        env = ShopEnv(shop_catalog, banana_goal)
        env.reset()
        for i, (verb, arg) in enumerate(episode["actions"], start=1):
            env.execute(action(i, verb, arg))
        result = env.result()
        assert result["score"] == episode["expected_score"], episode["id"]
    assert result["success"] is True  # the last episode covers everything


def test_score_no_purchase(banana_goal, shop_catalog):
    score, success = score_episode(banana_goal, None, shop_catalog)
    assert (score, success) == (0.0, False)


def test_price_gate_zeroes_score(shop_catalog):
    goal = ShopGoal(
        instruction="cheap bright citrus deodorant",
        attributes=frozenset({"deodorant", "bright citrus"}),
        options={},
        price_cap=5.0,
    )
    score, success = score_episode(goal, Purchase("B078GWRC1J", {}), shop_catalog)
    assert (score, success) == (0.0, False)


def test_score_partial_coverage(shop_catalog, banana_goal):
    score, success = score_episode(banana_goal, Purchase("B0061IVFZE", {}), shop_catalog)
    assert score == 0.125 and not success
    score, success = score_episode(
        banana_goal,
        Purchase("B092JLLYK6", {"flavor name": "apple cinnamon", "size": "0.53 ounce (pack of 16)"}),
        shop_catalog,
    )
    assert score == 1.0 and success


def test_fuzzed_purchases_keep_score_bounds(shop_catalog, shop_goals):
    rng = random.Random(23)
    ids = [
        "B078GWRC1J", "B078GTKVXY", "B08KBVJ4XN", "B0061IVFZE", "B096H2P6G2", "B092JLLYK6",
    ] + [f"SYN{i:05d}" for i in range(0, 200, 7)] + ["GHOST"]
    goals = list(shop_goals.values())
    for _ in range(500):
        goal = rng.choice(goals)
        pid = rng.choice(ids)
        product = shop_catalog.get(pid)
        options = {}
        if product and product.options and rng.random() < 0.8:
            name = rng.choice(list(product.options))
            options[name] = rng.choice(product.options[name])
        score, success = score_episode(goal, Purchase(pid, options), shop_catalog)
        assert 0.0 <= score <= 1.0
        assert success == (score == 1.0)


def test_adversarial_widget_clicks_never_crash(shop_catalog, banana_goal):
    rng = random.Random(99)
    env = ShopEnv(shop_catalog, banana_goal)
    env.reset()
    widgets = [
        "Buy Now", "Next", "Prev", "Back to Search", "B092JLLYK6", "apple cinnamon",
        "", "[[[", "]]]", "'; DROP TABLE", "\n\n", "Ω" * 50,
    ]
    for i in range(400):
        if rng.random() < 0.2:
            env.execute(action(i + 1, "search", rng.choice(["banana", "lamp", "zzz", ""])))
        else:
            env.execute(action(i + 1, "click", rng.choice(widgets)))
        env.state_hash()  # always a defined page
    assert isinstance(env.result()["score"], float)


def test_determinism_same_actions_same_score(shop_catalog, banana_goal):
    def run():
        env = ShopEnv(shop_catalog, banana_goal)
        env.reset()
        for i, (verb, arg) in enumerate(
            [
                ("search", "sixteen pack apple cinnamon freeze dried banana chips"),
                ("click", "B092JLLYK6"),
                ("click", "apple cinnamon"),
                ("click", "0.53 ounce (pack of 16)"),
                ("click", "Buy Now"),
            ],
            start=1,
        ):
            env.execute(action(i, verb, arg))
        return env.result()

    assert run() == run()


def test_thought_echo_and_state_neutrality(shop_catalog, banana_goal):
    env = ShopEnv(shop_catalog, banana_goal)
    env.reset()
    env.execute(action(1, "search", "banana"))
    before = env.state_hash()
    assert env.execute(action(2, "think", "which one?")) == "OK."
    assert env.state_hash() == before


def test_catalog_round_trip(tmp_path, shop_catalog):
    path = str(tmp_path / "catalog.jsonl")
    shop_catalog.save(path)
    from thoughtloop.envs.shop import Catalog

    reloaded = Catalog.load(path)
    assert len(reloaded) == len(shop_catalog)
    assert reloaded.get("B092JLLYK6") == shop_catalog.get("B092JLLYK6")
