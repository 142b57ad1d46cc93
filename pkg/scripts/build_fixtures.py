#!/usr/bin/env python3
"""Regenerate the frozen fixture files under src/thoughtloop/fixtures/data/.

Authored data (wiki corpus, QA exemplars, curated shop products, reference
trajectories) lives here as Python literals; derived data (household
exemplars, synthetic catalog rows) is produced by running the environments,
which keeps observation strings byte-consistent with the runtime. Outputs
are committed; rerun only when a fixture convention deliberately changes.
"""

from __future__ import annotations

import json
import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from thoughtloop.envs.household import (  # noqa: E402
    VERB_REGISTRY,
    HouseholdEnv,
    HouseholdInstance,
    Item,
    Location,
    WorldState,
    generate_instances,
    split_name,
)
from thoughtloop.envs.shop import Catalog, Product, ShopEnv, ShopGoal  # noqa: E402
from thoughtloop.parsing import GAME, SurfaceSyntax, parse_completion  # noqa: E402
from thoughtloop.trajectory import TaskSpec  # noqa: E402

DATA = ROOT / "src" / "thoughtloop" / "fixtures" / "data"


def T(i: int, text: str) -> list:
    return ["thought", i, text]


def A(i: int, verb: str, arg: str) -> list:
    return ["action", i, verb, [arg]]


def O(i: int, text: str) -> list:
    return ["observation", i, text]


def dump_json(name: str, payload) -> None:
    (DATA / name).write_text(
        json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


def dump_jsonl(name: str, records) -> None:
    with open(DATA / name, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


# ── wiki corpus ──────────────────────────────────────────────────────────────

NIKOLAJ = [
    "Nikolaj William Coster-Waldau (born 27 July 1970) is a Danish actor and producer.",
    "He graduated from the Danish National School of Performing Arts in Copenhagen in 1993,[1] and had his breakthrough role in Denmark with the film Nightwatch (1994).",
    "He played Jaime Lannister in the HBO fantasy drama series Game of Thrones, for which he received two Primetime Emmy Award nominations for Outstanding Supporting Actor in a Drama Series..",
    "Coster-Waldau has appeared in numerous films in his native Denmark and Scandinavia, including Headhunters (2011) and A Thousand Times Good Night (2013).",
    "In the U.S, his debut film role was in the war film Black Hawk Down (2001), playing Medal of Honor recipient Gary Gordon.[2] He then played a detective in the short-lived Fox television series New Amsterdam (2008), and appeared in the 2009 Fox television film Virtuality, originally intended as a pilot.",
]

WIKI_PAGES = [
    {
        "title": "Colorado orogeny",
        "lead": 1,
        "sentences": [
            "The Colorado orogeny was an episode of mountain building (an orogeny) in Colorado and surrounding areas.",
            "The eastern sector extends into the High Plains and is called the Central Plains orogeny.",
        ],
    },
    {
        "title": "High Plains",
        "sentences": ["High Plains refers to one of two distinct land regions:"],
    },
    {
        "title": "High Plains (United States)",
        "sentences": [
            "The High Plains are a subregion of the Great Plains.",
            "From east to west, the High Plains rise in elevation from around 1,800 to 7,000 ft (550 to 2,130 m).[3]",
        ],
    },
    {
        "title": "Milhouse",
        "lead": 1,
        "sentences": [
            "Milhouse Mussolini Van Houten is a recurring character in the Fox animated television series The Simpsons voiced by Pamela Hayden and created by Matt Groening.",
            "Milhouse was named after U.S. president Richard Nixon, whose middle name was Milhous.",
        ],
    },
    {
        "title": "Adam Clayton Powell (film)",
        "sentences": [
            "Adam Clayton Powell is a 1989 American documentary film directed by Richard Kilberg.",
            "The film is about the rise and fall of influential African-American politician Adam Clayton Powell Jr.[3][4]",
            "It was later aired as part of the PBS series The American Experience.",
        ],
    },
    {
        "title": "Nicholas Ray",
        "sentences": [
            "Nicholas Ray (born Raymond Nicholas Kienzle Jr., August 7, 1911 – June 16, 1979) was an American film director, screenwriter, and actor best known for the 1955 film Rebel Without a Cause.",
        ],
    },
    {
        "title": "Elia Kazan",
        "sentences": [
            "Elia Kazan was an American film and theatre director, producer, screenwriter and actor.",
        ],
    },
    {
        "title": "Arthur's Magazine",
        "sentences": [
            "Arthur's Magazine (1844-1846) was an American literary periodical published in Philadelphia in the 19th century.",
        ],
    },
    {
        "title": "First for Women",
        "sentences": [
            "First for Women is a woman's magazine published by Bauer Media Group in the USA.[1]",
            "The magazine was started in 1989.",
        ],
    },
    {
        "title": "Pavel Urysohn",
        "sentences": [
            "Pavel Samuilovich Urysohn (February 3, 1898 - August 17, 1924) was a Soviet mathematician who is best known for his contributions in dimension theory.",
        ],
    },
    {
        "title": "Leonid Levin",
        "sentences": [
            "Leonid Anatolievich Levin is a Soviet-American mathematician and computer scientist.",
        ],
    },
    {
        "title": "Nikolaj Coster-Waldau",
        "sentences": NIKOLAJ,
    },
    {
        "title": "Stranger Things",
        "sentences": [
            "Stranger Things is an American science fiction horror drama television series created by the Duffer Brothers.",
            "Set in the 1980s, primarily in the fictional town of Hawkins, Indiana, the series centers on a number of mysteries and supernatural events occurring around the town and their impact on an ensemble of child and adult characters.",
        ],
    },
    {
        "title": "Beautiful (Christina Aguilera song)",
        "lead": 1,
        "sentences": [
            '"Beautiful" is a song recorded by American singer Christina Aguilera for her fourth studio album, Stripped (2002).',
            "The song peaked at number two on the Billboard Hot 100 in the United States, where it was certified Gold for 500,000 units shipped.",
            "It became one of Aguilera's biggest hits, topping the Billboard Hot 100 Airplay chart for several weeks.",
            "Year-end Billboard Hot 100 rankings placed the song among the top singles of 2003.",
        ],
    },
    # Synthetic pages exercising the display rules (first-5 cap, lookup walk).
    {
        "title": "Blue Heron",
        "sentences": [
            "The blue heron is a long-legged wading bird found near open water.",
            "Adults stand over a meter tall with a wingspan approaching two meters.",
            "The heron hunts by standing motionless and striking at passing fish.",
        ],
    },
    {
        "title": "Granite Peak",
        "sentences": [
            "Granite Peak is the highest point of its range.",
            "The summit rises sharply above the surrounding plateau.",
            "Snow lingers on the north face well into summer.",
            "The first recorded ascent took three attempts.",
            "A popular route follows the east ridge.",
        ],
    },
    {
        "title": "Willow River",
        "sentences": [
            "The Willow River drains a broad agricultural valley.",
            "Its headwaters rise in a chain of spring-fed lakes.",
            "The river descends through a series of low falls.",
            "Flooding along the river shaped the early settlements.",
            "A dam on the lower river powers a small mill.",
            "The river freezes over in most winters.",
            "Canoeing the river is popular in late spring.",
        ],
    },
]

WIKI_INDEX_TITLES = [
    "Adam Clayton Powell III",
    "Seventh Avenue (Manhattan)",
    "Adam Clayton Powell Jr. State Office Building",
    "Isabel Washington Powell",
    "Adam Powell",
    "Giancarlo Esposito",
    "Beautiful",
    "Beautiful, Beautiful",
    "A Beautiful Mind (film)",
    "Life Is Beautiful",
]

# Suggestion lists recorded from the original search engine; token similarity
# cannot reconstruct these orderings, so misses on these queries replay the
# recorded list (top five).
WIKI_SUGGESTIONS = [
    {
        "suggest_for": "Adam Clayton Powell",
        "titles": [
            "Adam Clayton Powell III",
            "Seventh Avenue (Manhattan)",
            "Adam Clayton Powell Jr. State Office Building",
            "Isabel Washington Powell",
            "Adam Powell",
        ],
    },
    {
        "suggest_for": "Beautiful",
        "titles": [
            "Beautiful",
            "Beautiful, Beautiful",
            "A Beautiful Mind (film)",
            "Beautiful (Christina Aguilera song)",
            "Life Is Beautiful",
        ],
    },
]


def build_wiki() -> None:
    records = [dict(p) for p in WIKI_PAGES]
    records += [{"index_title": t} for t in WIKI_INDEX_TITLES]
    records += WIKI_SUGGESTIONS
    dump_jsonl("wiki_corpus.jsonl", records)


# ── QA exemplars ─────────────────────────────────────────────────────────────

SIM_ACP = (
    "Could not find [Adam Clayton Powell]. Similar: ['Adam Clayton Powell III', "
    "'Seventh Avenue (Manhattan)', 'Adam Clayton Powell Jr. State Office Building', "
    "'Isabel Washington Powell', 'Adam Powell']."
)
SIM_BEAUTIFUL = (
    "Could not find [Beautiful]. Similar: ['Beautiful', 'Beautiful, Beautiful', "
    "'A Beautiful Mind (film)', 'Beautiful (Christina Aguilera song)', 'Life Is Beautiful']."
)

HOTPOTQA_EXEMPLARS = {
    "domain": "wiki-qa",
    "header": "",
    "exemplars": [
        {
            "id": "wiki-qa-elevation-range",
            "instruction": "What is the elevation range for the area that the eastern sector of the Colorado orogeny extends into?",
            "cot_marker": True,
            "steps": [
                T(1, "I need to search Colorado orogeny, find the area that the eastern sector of the Colorado orogeny extends into, then find the elevation range of the area."),
                A(1, "search", "Colorado orogeny"),
                O(1, "The Colorado orogeny was an episode of mountain building (an orogeny) in Colorado and surrounding areas."),
                T(2, "It does not mention the eastern sector. So I need to look up eastern sector."),
                A(2, "lookup", "eastern sector"),
                O(2, "(Result 1 / 1) The eastern sector extends into the High Plains and is called the Central Plains orogeny."),
                T(3, "The eastern sector of Colorado orogeny extends into the High Plains. So I need to search High Plains and find its elevation range."),
                A(3, "search", "High Plains"),
                O(3, "High Plains refers to one of two distinct land regions:"),
                T(4, "I need to instead search High Plains (United States)."),
                A(4, "search", "High Plains (United States)"),
                O(4, "The High Plains are a subregion of the Great Plains. From east to west, the High Plains rise in elevation from around 1,800 to 7,000 ft (550 to 2,130 m).[3]"),
                T(5, "High Plains rise in elevation from around 1,800 to 7,000 ft, so the answer is 1,800 to 7,000 ft."),
                A(5, "finish", "1,800 to 7,000 ft"),
            ],
        },
        {
            "id": "wiki-qa-character-namesake",
            "instruction": 'Musician and satirist Allie Goertz wrote a song about the "The Simpsons" character Milhouse, who Matt Groening named after who?',
            "cot_marker": True,
            "steps": [
                T(1, 'The question simplifies to "The Simpsons" character Milhouse is named after who. I only need to search Milhouse and find who it is named after.'),
                A(1, "search", "Milhouse"),
                O(1, "Milhouse Mussolini Van Houten is a recurring character in the Fox animated television series The Simpsons voiced by Pamela Hayden and created by Matt Groening."),
                T(2, 'The paragraph does not tell who Milhouse is named after, maybe I can look up "named after".'),
                A(2, "lookup", "named after"),
                O(2, "(Result 1 / 1) Milhouse was named after U.S. president Richard Nixon, whose middle name was Milhous."),
                T(3, "Milhouse was named after U.S. president Richard Nixon, so the answer is Richard Nixon."),
                A(3, "finish", "Richard Nixon"),
            ],
        },
        {
            "id": "wiki-qa-documentary-finnish-rock",
            "instruction": "Which documentary is about Finnish rock groups, Adam Clayton Powell or The Saimaa Gesture?",
            "cot_marker": True,
            "steps": [
                T(1, "I need to search Adam Clayton Powell and The Saimaa Gesture, and find which documentary is about Finnish rock groups."),
                A(1, "search", "Adam Clayton Powell"),
                O(1, SIM_ACP),
                T(2, "To find the documentary, I can search Adam Clayton Powell (film)."),
                A(2, "search", "Adam Clayton Powell (film)"),
                O(2, "Adam Clayton Powell is a 1989 American documentary film directed by Richard Kilberg. The film is about the rise and fall of influential African-American politician Adam Clayton Powell Jr.[3][4] It was later aired as part of the PBS series The American Experience."),
                T(3, "Adam Clayton Powell (film) is a documentary about an African-American politician, not Finnish rock groups. So the documentary about Finnish rock groups must instead be The Saimaa Gesture."),
                A(3, "finish", "The Saimaa Gesture"),
            ],
        },
        {
            "id": "wiki-qa-shared-profession",
            "instruction": "What profession does Nicholas Ray and Elia Kazan have in common?",
            "cot_marker": True,
            "steps": [
                T(1, "I need to search Nicholas Ray and Elia Kazan, find their professions, then find the profession they have in common."),
                A(1, "search", "Nicholas Ray"),
                O(1, "Nicholas Ray (born Raymond Nicholas Kienzle Jr., August 7, 1911 – June 16, 1979) was an American film director, screenwriter, and actor best known for the 1955 film Rebel Without a Cause."),
                T(2, "Professions of Nicholas Ray are director, screenwriter, and actor. I need to search Elia Kazan next and find his professions."),
                A(2, "search", "Elia Kazan"),
                O(2, "Elia Kazan was an American film and theatre director, producer, screenwriter and actor."),
                T(3, "Professions of Elia Kazan are director, producer, screenwriter, and actor. So profession Nicholas Ray and Elia Kazan have in common is director, screenwriter, and actor."),
                A(3, "finish", "director, screenwriter, actor"),
            ],
        },
        {
            "id": "wiki-qa-magazine-started-first",
            "instruction": "Which magazine was started first Arthur's Magazine or First for Women?",
            "cot_marker": True,
            "steps": [
                T(1, "I need to search Arthur's Magazine and First for Women, and find which was started first."),
                A(1, "search", "Arthur's Magazine"),
                O(1, "Arthur's Magazine (1844-1846) was an American literary periodical published in Philadelphia in the 19th century."),
                T(2, "Arthur's Magazine was started in 1844. I need to search First for Women next."),
                A(2, "search", "First for Women"),
                O(2, "First for Women is a woman's magazine published by Bauer Media Group in the USA.[1] The magazine was started in 1989."),
                T(3, "First for Women was started in 1989. 1844 (Arthur's Magazine) < 1989 (First for Women), so Arthur's Magazine was started first."),
                A(3, "finish", "Arthur's Magazine"),
            ],
        },
        {
            "id": "wiki-qa-same-type-of-work",
            "instruction": "Were Pavel Urysohn and Leonid Levin known for the same type of work?",
            "cot_marker": True,
            "steps": [
                T(1, "I need to search Pavel Urysohn and Leonid Levin, find their types of work, then find if they are the same."),
                A(1, "search", "Pavel Urysohn"),
                O(1, "Pavel Samuilovich Urysohn (February 3, 1898 - August 17, 1924) was a Soviet mathematician who is best known for his contributions in dimension theory."),
                T(2, "Pavel Urysohn is a mathematician. I need to search Leonid Levin next and find its type of work."),
                A(2, "search", "Leonid Levin"),
                O(2, "Leonid Anatolievich Levin is a Soviet-American mathematician and computer scientist."),
                T(3, "Leonid Levin is a mathematician and computer scientist. So Pavel Urysohn and Leonid Levin have the same type of work."),
                A(3, "finish", "yes"),
            ],
        },
    ],
}

FEVER_HEADER = (
    "Determine if there is Observation that SUPPORTS or REFUTES a Claim, "
    "or if there is NOT ENOUGH INFORMATION."
)

FEVER_EXEMPLARS = {
    "domain": "wiki-fever",
    "header": FEVER_HEADER,
    "exemplars": [
        {
            "id": "wiki-fever-fox-broadcasting",
            "instruction": "Nikolaj Coster-Waldau worked with the Fox Broadcasting Company.",
            "cot_marker": True,
            "steps": [
                T(1, "I need to search Nikolaj Coster-Waldau and find if he has worked with the Fox Broadcasting Company."),
                A(1, "search", "Nikolaj Coster-Waldau"),
                O(1, " ".join(NIKOLAJ)),
                T(2, 'Because he "appeared in the 2009 Fox television film Virtuality", he should have worked with the Fox Broadcasting Company.'),
                A(2, "finish", "SUPPORTS"),
            ],
        },
        {
            "id": "wiki-fever-series-setting",
            "instruction": "Stranger Things is set in Bloomington, Indiana.",
            "cot_marker": True,
            "steps": [
                T(1, "I should search for Stranger Things, and see if it is set in Bloomington, Indiana."),
                A(1, "search", "Stranger Things"),
                O(1, "Stranger Things is an American science fiction horror drama television series created by the Duffer Brothers. Set in the 1980s, primarily in the fictional town of Hawkins, Indiana, the series centers on a number of mysteries and supernatural events occurring around the town and their impact on an ensemble of child and adult characters."),
                T(2, 'The observation says that it is set in a "fictional town of Hawkins, Indiana", so it is not set in Bloomington.'),
                A(2, "finish", "REFUTES"),
            ],
        },
        {
            "id": "wiki-fever-chart-peak-year",
            "instruction": "Beautiful reached number two on the Billboard Hot 100 in 2003.",
            "cot_marker": True,
            "steps": [
                T(1, "I need to search the song Beautiful and find if it reached number two on the Billboard Hot 100 in 2003."),
                A(1, "search", "Beautiful"),
                O(1, SIM_BEAUTIFUL),
                T(2, 'From suggestions, I should search "Beautiful (Christina Aguilera song)" to find the song.'),
                A(2, "search", "Beautiful (Christina Aguilera song)"),
                O(2, '"Beautiful" is a song recorded by American singer Christina Aguilera for her fourth studio album, Stripped (2002).'),
                T(3, 'It does not mention Billboard, so I need to look up "Billboard Hot 100" to find if it reached number two on it in 2003.'),
                A(3, "lookup", "Billboard Hot 100"),
                O(3, "(Result 1 / 3) The song peaked at number two on the Billboard Hot 100 in the United States, where it was certified Gold for 500,000 units shipped."),
                T(4, "It only says the song peaked at number two on the Billboard Hot 100, but not if it was in 2003. I am not sure if this claim is true or not."),
                A(4, "finish", "NOT ENOUGH INFO"),
            ],
        },
    ],
}


def build_qa_exemplars() -> None:
    dump_json("exemplars_hotpotqa.json", HOTPOTQA_EXEMPLARS)
    dump_json("exemplars_fever.json", FEVER_EXEMPLARS)


# ── reference trajectories ───────────────────────────────────────────────────


def build_references() -> None:
    milhouse = HOTPOTQA_EXEMPLARS["exemplars"][1]
    dump_json(
        "replay_hotpotqa.json",
        {
            "references": [
                {
                    "task": {
                        "domain": "wiki-qa",
                        "instruction": milhouse["instruction"],
                        "gold": "Richard Nixon",
                        "step_limit": 7,
                    },
                    "steps": milhouse["steps"],
                }
            ]
        },
    )
    golds = {"wiki-fever-fox-broadcasting": "SUPPORTS",
             "wiki-fever-series-setting": "REFUTES",
             "wiki-fever-chart-peak-year": "NOT ENOUGH INFO"}
    dump_json(
        "replay_fever.json",
        {
            "references": [
                {
                    "task": {
                        "domain": "wiki-fever",
                        "instruction": ex["instruction"],
                        "gold": golds[ex["id"]],
                        "step_limit": 5,
                    },
                    "steps": ex["steps"],
                }
                for ex in FEVER_EXEMPLARS["exemplars"]
            ]
        },
    )


# ── household demo world and reference trajectory ────────────────────────────


def demo_kitchen() -> HouseholdInstance:
    locations: dict[str, Location] = {}

    def loc(name: str, openable: bool = False, opened: bool = True) -> None:
        locations[name] = Location(name, openable=openable, opened=opened)

    for i, opened in [(1, True), (2, False), (3, True), (4, True), (5, False), (6, False)]:
        loc(f"cabinet {i}", openable=True, opened=opened)
    for i in (1, 2, 3):
        loc(f"drawer {i}", openable=True, opened=False)
    for i in (1, 2, 3):
        loc(f"countertop {i}")
        loc(f"shelf {i}")
    for i in (1, 2, 3, 4):
        loc(f"stoveburner {i}")
    loc("coffeemachine 1")
    loc("fridge 1", openable=True, opened=False)
    loc("garbagecan 1")
    loc("microwave 1", openable=True, opened=False)
    loc("sinkbasin 1")
    loc("toaster 1")

    placements = {
        "cabinet 1": ["bowl 1"],
        "cabinet 3": ["glassbottle 1"],
        "cabinet 4": ["mug 1"],
        "countertop 1": ["lettuce 2", "mug 2", "peppershaker 1", "spoon 2"],
        "countertop 2": ["cup 1", "dishsponge 1", "glassbottle 3", "knife 1", "plate 2", "potato 3", "statue 1"],
        "countertop 3": ["bread 3", "butterknife 2", "cellphone 1", "creditcard 1", "fork 2", "houseplant 1", "knife 2", "spatula 1", "statue 3", "tomato 1", "tomato 2", "tomato 3", "vase 2"],
        "sinkbasin 1": ["fork 3", "lettuce 3", "spatula 2"],
    }
    items = {
        name: Item(name, location)
        for location, names in placements.items()
        for name in names
    }
    world = WorldState(locations=locations, items=items, agent_at="")
    task = TaskSpec(
        domain="household",
        instruction="put a clean knife in countertop.",
        gold="demo-clean-knife",
        step_limit=50,
    )
    from thoughtloop.envs.household import GoalSpec

    goal = GoalSpec("clean", "knife", "countertop")
    expert = (
        "go to countertop 2",
        "take knife 1 from countertop 2",
        "go to sinkbasin 1",
        "clean knife 1 with sinkbasin 1",
        "go to countertop 1",
        "put knife 1 in/on countertop 1",
    )
    return HouseholdInstance("demo-clean-knife", task, goal, world, expert)


DEMO_COMMANDS = [
    ("think", "To solve the task, I need to find and take a knife, then clean it with sinkbasin, then put it in countertop."),
    ("think", "First I need to find a knife. A knife is more likely to appear in cabinet (1-6), drawer (1-3), countertop (1-3), fridge (1), garbagecan (1), shelf (1-3), sinkbasin (1), stoveburner (1-4), toaster (1). I can check one by one, starting with cabinet 1."),
    ("act", "go to cabinet 1"),
    ("act", "go to cabinet 2"),
    ("act", "go to cabinet 3"),
    ("act", "go to cabinet 4"),
    ("act", "go to cabinet 5"),
    ("act", "go to cabinet 6"),
    ("act", "go to drawer 1"),
    ("act", "go to drawer 2"),
    ("act", "go to drawer 3"),
    ("act", "go to countertop 1"),
    ("act", "go to countertop 2"),
    ("think", "Now I find a knife (1). Next, I need to take it."),
    ("act", "take knife 1 from countertop 2"),
    ("think", "Now I take a knife (1). Next, I need to go to sinkbasin (1) and clean it."),
    ("act", "go to sinkbasin 1"),
    ("act", "clean knife 1 with sinkbasin 1"),
    ("think", "Now I clean a knife (1). Next, I need to put it in/on countertop 1."),
    ("act", "go to countertop 1"),
    ("act", "put knife 1 in/on countertop 1"),
]


def narrate(instance: HouseholdInstance, commands) -> list[list]:
    """Execute narrated commands against a fresh env, producing fixture steps."""
    env = HouseholdEnv(instance)
    syntax = SurfaceSyntax(GAME, VERB_REGISTRY)
    opening = env.reset()
    steps = [O(1, opening)]
    t_i = a_i = 0
    o_i = 1
    for kind, payload in commands:
        if kind == "think":
            t_i += 1
            steps.append(T(t_i, payload))
            o_i += 1
            steps.append(O(o_i, "OK."))
            continue
        act = parse_completion(f"> {payload}", syntax)
        a_i += 1
        steps.append(["action", a_i, act.verb, list(act.args)])
        obs = env.execute(act)
        if obs == "Nothing happens.":
            raise AssertionError(f"narrated command is illegal: {payload}")
        o_i += 1
        steps.append(O(o_i, obs))
        if env.is_done():
            return steps
    if not env.is_done():
        raise AssertionError("narration did not reach the goal")
    return steps


def build_household_demo() -> None:
    instance = demo_kitchen()
    dump_json("household_demo.json", instance.to_dict())
    steps = narrate(instance, DEMO_COMMANDS)
    dump_json(
        "replay_household.json",
        {
            "references": [
                {
                    "task": {
                        "domain": "household",
                        "instruction": instance.task.instruction,
                        "gold": instance.id,
                        "step_limit": 50,
                    },
                    "steps": steps,
                }
            ]
        },
    )


# ── household exemplars (3 per task type) ────────────────────────────────────

STATIONS = {"clean": ("sinkbasin", "clean"), "heat": ("microwave", "heat"), "cool": ("fridge", "cool")}


def household_narration(instance: HouseholdInstance) -> list[tuple[str, str]]:
    goal = instance.goal
    kind = goal.object_kind
    target = None
    for command in instance.expert:
        if command.startswith("put "):
            target = command.split(" in/on ")[1]
    commands: list[tuple[str, str]] = []
    if goal.task_type in STATIONS:
        station, verb = STATIONS[goal.task_type]
        commands.append(("think", f"To solve the task, I need to find and take a {kind}, then {verb} it with {station}, then put it in {goal.target_kind}."))
    elif goal.task_type == "look":
        commands.append(("think", f"To solve the task, I need to find and take a {kind}, then find and use a desklamp."))
    elif goal.task_type == "pick2":
        commands.append(("think", f"To solve the task, I need to find and take the first {kind}, then put it in {goal.target_kind}, then find and take the second {kind}, then put it in {goal.target_kind}."))
    else:
        commands.append(("think", f"To solve the task, I need to find and take a {kind}, then put it in {goal.target_kind}."))

    takes_seen = 0
    for command in instance.expert:
        if command.startswith("take "):
            takes_seen += 1
            obj = command[len("take ") :].split(" from ")[0]
            n = split_name(obj)[1]
            if goal.task_type == "pick2":
                noun = ("the first " if takes_seen == 1 else "the second ") + kind
            else:
                noun = f"a {kind}"
            commands.append(("think", f"Now I find {noun} ({n}). Next, I need to take it."))
            commands.append(("act", command))
            if goal.task_type in STATIONS:
                station, verb = STATIONS[goal.task_type]
                commands.append(("think", f"Now I take {noun} ({n}). Next, I need to go to {station} (1) and {verb} it."))
            elif goal.task_type == "look":
                commands.append(("think", f"Now I take {noun} ({n}). Next, I need to find a desklamp."))
            else:
                commands.append(("think", f"Now I take {noun} ({n}). Next, I need to put it in/on {target}."))
        elif any(command.startswith(f"{v} ") for v in ("clean", "heat", "cool")):
            verb = command.split(" ", 1)[0]
            obj = command.split(" ", 1)[1].split(" with ")[0]
            n = split_name(obj)[1]
            commands.append(("act", command))
            commands.append(("think", f"Now I {verb} a {kind} ({n}). Next, I need to put it in/on {target}."))
        elif command.startswith("use "):
            lamp = command[len("use ") :]
            commands.append(("think", f"Now I find a desklamp ({split_name(lamp)[1]}). Next, I need to use it."))
            commands.append(("act", command))
        else:
            commands.append(("act", command))
    return commands


def household_im_notes(instance: HouseholdInstance) -> list[dict]:
    goal = instance.goal
    kind = goal.object_kind
    adjective = {"clean": "clean ", "heat": "hot ", "cool": "cool "}.get(goal.task_type, "")
    target = None
    for command in instance.expert:
        if command.startswith("put "):
            target = command.split(" in/on ")[1]
    notes = []
    if goal.task_type == "look":
        decomp = f"To solve the task, I need to find and take a {kind}, then examine it with the desklamp."
    else:
        decomp = f"To solve the task, I need to find and take a {adjective}{kind}, then put it in {goal.target_kind}."
    notes.append({"before_action": 1, "text": decomp})
    holding = None
    processed = goal.task_type not in STATIONS
    for a_idx, command in enumerate(instance.expert, start=1):
        if holding is None:
            text = f"I need to find a {adjective}{kind}."
        elif not processed:
            station, verb = STATIONS[goal.task_type]
            text = f"I need to {verb} the {kind} ({split_name(holding)[1]})."
        elif goal.task_type == "look":
            text = f"I need to examine the {kind} ({split_name(holding)[1]}) under the desklamp."
        else:
            text = f"I need to put this {kind} ({split_name(holding)[1]}) in/on {target}."
        notes.append({"before_action": a_idx, "text": text})
        if command.startswith("take "):
            holding = command[len("take ") :].split(" from ")[0]
        elif command.startswith("put "):
            holding = None
            processed = goal.task_type not in STATIONS
        elif any(command.startswith(f"{v} ") for v in ("clean", "heat", "cool")):
            processed = True
    return notes


def build_household_exemplars() -> None:
    from thoughtloop.envs.household import TASK_TYPES

    sets = {}
    im_table = {}
    for task_type in TASK_TYPES:
        instances = generate_instances(task_type, seed=101, count=3)
        exemplars = []
        for idx, instance in enumerate(instances):
            exemplar_id = f"household-{task_type}-{idx}"
            steps = narrate(instance, household_narration(instance))
            exemplars.append(
                {
                    "id": exemplar_id,
                    "instruction": instance.task.instruction,
                    "steps": steps,
                }
            )
            im_table[exemplar_id] = household_im_notes(instance)
        sets[task_type] = {"domain": "household", "header": "", "exemplars": exemplars}
    dump_json("exemplars_household.json", sets)
    dump_json("im_household.json", im_table)


# ── shop catalog, goals, exemplar ────────────────────────────────────────────

CURATED_PRODUCTS = [
    {
        "id": "B078GWRC1J",
        "title": "Bright Citrus Deodorant by Earth Mama | Natural and Safe for Sensitive Skin, Pregnancy and Breastfeeding, Contains Organic Calendula 3-Ounce",
        "price": 10.99,
        "options": {
            "scent": ["assorted scents", "bright citrus", "calming lavender", "ginger fresh", "simply non-scents"],
            "size": ["travel set (4-pack)", "3 ounce (pack of 1)", "3-ounce (2-pack)"],
        },
        "attributes": ["deodorant", "bright citrus", "sensitive skin", "natural", "3 ounce"],
    },
    {
        "id": "B078GTKVXY",
        "title": "Ginger Fresh Deodorant by Earth Mama | Natural and Safe for Sensitive Skin, Pregnancy and Breastfeeding, Contains Organic Calendula 3-Ounce",
        "price": 10.99,
        "options": {
            "scent": ["assorted scents", "bright citrus", "calming lavender", "ginger fresh", "simply non-scents"],
            "size": ["travel set (4-pack)", "3 ounce (pack of 1)", "3-ounce (2-pack)"],
        },
        "attributes": ["deodorant", "ginger fresh", "sensitive skin", "natural", "3 ounce"],
    },
    {
        "id": "B08KBVJ4XN",
        "title": "Barrel and Oak - Aluminum-Free Deodorant, Deodorant for Men, Essential Oil-Based Scent, 24-Hour Odor Protection, Cedar & Patchouli Blend, Gentle on Sensitive Skin (Mountain Sage, 2.7 oz, 2-Pack)",
        "price": 15.95,
        "options": {
            "scent": ["mountain sage", "cedar patchouli"],
        },
        "attributes": ["deodorant", "sensitive skin", "aluminum-free"],
    },
    {
        "id": "B0061IVFZE",
        "title": "Brothers-ALL-Natural Fruit Crisps, Strawberry Banana, 0.42 Ounce (Pack of 100)",
        "price": 42.99,
        "options": {
            "flavor name": ["asian pear", "fuji apple & cinnamon", "strawberry banana"],
        },
        "attributes": ["fruit crisps", "strawberry banana", "all natural"],
    },
    {
        "id": "B096H2P6G2",
        "title": "Moon Fruit Freeze Dried Fruit Snacks. Fruit Snacks for Kids - (Variety Pack)",
        "price": 18.99,
        "options": {
            "flavor name": ["variety pack"],
        },
        "attributes": ["freeze-dried", "fruit snack", "kids"],
    },
    {
        "id": "B092JLLYK6",
        "title": "Nature's Turn Freeze-Dried Fruit Snacks - Banana Crisps - Perfect For School Lunches or an On-The-Go Snack - No Sugar Added, Non GMO, Gluten Free, Nothing Artificial (0.53oz) 6-Pack",
        "price": 12.99,
        "options": {
            "flavor name": ["apple", "apple cinnamon", "banana", "cantaloupe", "peach", "pear", "strawberry", "strawberry banana", "sampler variety pack", "mega variety pack", "orchard variety pack"],
            "size": ["0.53 ounce (pack of 6)", "0.53 ounce (pack of 8)", "0.53 ounce (pack of 16)"],
        },
        "attributes": ["freeze-dried", "banana chips", "fruit snack", "no sugar added", "gluten free", "non gmo"],
    },
]

# Tokens reserved for the two replayed searches; synthetic titles must avoid
# them so the curated products stay on page one in the reference order.
FORBIDDEN_TOKENS = {
    "3", "ounce", "bright", "citrus", "deodorant", "sensitive", "skin",
    "sixteen", "pack", "apple", "cinnamon", "freeze", "dried", "banana", "chips",
}

_ADJECTIVES = ["Classic", "Ergonomic", "Foldable", "Handcrafted", "Modern", "Rustic", "Sleek", "Sturdy", "Vintage", "Weathered"]
_MATERIALS = ["Bamboo", "Canvas", "Ceramic", "Leather", "Linen", "Oak", "Steel", "Walnut", "Wicker", "Wool"]
_KINDS = [
    ("table lamp", "lighting"),
    ("desk chair", "furniture"),
    ("water bottle", "kitchen"),
    ("backpack", "travel"),
    ("notebook", "stationery"),
    ("wall clock", "decor"),
    ("area rug", "decor"),
    ("throw pillow", "decor"),
    ("coffee grinder", "kitchen"),
    ("bookend set", "decor"),
    ("picnic blanket", "outdoor"),
    ("garden trowel", "outdoor"),
]
_COLORS = ["black", "white", "navy", "olive", "charcoal", "burgundy", "teal", "mustard"]
_FEATURES = ["Reinforced Stitching", "Non-Slip Base", "Adjustable Height", "Easy-Clean Finish", "Extra Storage", "Quiet Operation"]


def synthetic_products(count: int, seed: int = 17) -> list[dict]:
    rng = random.Random(f"shop-catalog/{seed}")
    out = []
    for i in range(count):
        kind, category = _KINDS[i % len(_KINDS)]
        adjective = rng.choice(_ADJECTIVES)
        material = rng.choice(_MATERIALS)
        feature = rng.choice(_FEATURES)
        color = rng.choice(_COLORS)
        title = f"{adjective} {material} {kind.title()} with {feature}, {color.title()}"
        tokens = {t.lower().strip(",") for t in title.split()}
        assert not (tokens & FORBIDDEN_TOKENS), title
        colors = sorted(rng.sample(_COLORS, 3))
        if color not in colors:
            colors[0] = color
            colors.sort()
        out.append(
            {
                "id": f"SYN{i:05d}",
                "title": title,
                "price": round(rng.uniform(8.0, 120.0), 2),
                "options": {"color": colors, "size": ["small", "medium", "large"]},
                "attributes": sorted({kind, material.lower(), color, category}),
            }
        )
    return out


SHOP_GOALS = [
    {
        "id": "deodorant-bright-citrus",
        "instruction": "i would like a 3 ounce bottle of bright citrus deodorant for sensitive skin, and price lower than 50.00 dollars",
        "attributes": ["deodorant", "bright citrus", "sensitive skin"],
        "options": {"scent": "bright citrus", "size": "3 ounce (pack of 1)"},
        "price_cap": 50.0,
    },
    {
        "id": "banana-chips-16",
        "instruction": "get me a sixteen pack of apple cinnamon freeze dried banana chips, and price lower than 50.00 dollars",
        "attributes": ["freeze-dried", "banana chips", "fruit snack", "no sugar added", "gluten free"],
        "options": {"flavor name": "apple cinnamon", "size": "0.53 ounce (pack of 16)"},
        "price_cap": 50.0,
    },
    {
        "id": "navy-backpack",
        "instruction": "i need a navy canvas backpack for travel, under 60 dollars",
        "attributes": ["backpack", "canvas", "navy"],
        "options": {"color": "navy"},
        "price_cap": 60.0,
    },
    {
        "id": "teal-table-lamp",
        "instruction": "looking for a teal table lamp for my desk, less than 90 dollars",
        "attributes": ["table lamp", "teal"],
        "options": {"color": "teal"},
        "price_cap": 90.0,
    },
]


def build_shop() -> None:
    products = CURATED_PRODUCTS + synthetic_products(200)
    dump_jsonl("shop_catalog.jsonl", products)
    dump_jsonl("shop_goals.jsonl", SHOP_GOALS)

    catalog = Catalog([Product.from_dict(p) for p in products])
    goal = ShopGoal.from_dict(SHOP_GOALS[0])
    env = ShopEnv(catalog, goal)
    env.reset()
    search_obs = env.execute(parse_completion("Action: search[3 ounce bright citrus deodorant sensitive skin]", env.syntax))
    product_obs = env.execute(parse_completion("Action: click[B078GWRC1J]", env.syntax))
    click1 = env.execute(parse_completion("Action: click[bright citrus]", env.syntax))
    click2 = env.execute(parse_completion("Action: click[3 ounce (pack of 1)]", env.syntax))
    first_product = next(l for l in search_obs.splitlines() if l.startswith("[B0"))
    assert first_product == "[B078GWRC1J]", search_obs
    assert click1 == "You have clicked bright citrus."

    exemplar_steps = [
        A(1, "search", "3 ounce bright citrus deodorant sensitive skin"),
        O(1, search_obs),
        T(1, "B078GWRC1J and B078GTKVXY are bright citrus deodorant less then 50 dollars. I can check B078GWRC1J first."),
        O(2, "OK."),
        A(2, "click", "B078GWRC1J"),
        O(3, product_obs),
        T(2, "For 3 ounce bottle of bright citrus deodorant for sensitive skin, the item has options 'bright citrus' and '3 ounce (pack of 1)' and seems good to buy."),
        O(4, "OK."),
        A(3, "click", "bright citrus"),
        O(5, click1),
        A(4, "click", "3 ounce (pack of 1)"),
        O(6, click2),
        A(5, "click", "Buy Now"),
    ]
    dump_json(
        "exemplars_shop.json",
        {
            "domain": "shop",
            "header": "",
            "exemplars": [
                {
                    "id": "shop-deodorant",
                    "instruction": SHOP_GOALS[0]["instruction"],
                    "steps": exemplar_steps,
                }
            ],
        },
    )

    dump_json(
        "replay_shop.json",
        {
            "episodes": [
                {
                    "id": "attribute-miss",
                    "goal": "banana-chips-16",
                    "expected_score": 0.125,
                    "actions": [
                        ["search", "sixteen pack apple cinnamon freeze dried banana chips"],
                        ["click", "B0061IVFZE"],
                        ["click", "Buy Now"],
                    ],
                },
                {
                    "id": "attribute-match",
                    "goal": "banana-chips-16",
                    "expected_score": 1.0,
                    "actions": [
                        ["search", "sixteen pack apple cinnamon freeze dried banana chips"],
                        ["think", "B0061IVFZE is strawberry banana, not apple cinnamon. B096H2P6G2 is fruit snacks, not freeze dried banana chips. B092JLLYK6 is banana crisps, not apple cinnamon. I can check B092JLLYK6 first."],
                        ["click", "B092JLLYK6"],
                        ["think", "For sixteen pack of apple cinnamon freeze dried banana chips, the item has options 'apple cinnamon' and '0.53 ounce (pack of 16)' and seems good to buy."],
                        ["click", "apple cinnamon"],
                        ["click", "0.53 ounce (pack of 16)"],
                        ["click", "Buy Now"],
                    ],
                },
            ]
        },
    )


# ── demo task lists ──────────────────────────────────────────────────────────


def build_tasks() -> None:
    hotpot = [
        {"domain": "wiki-qa", "instruction": ex["instruction"], "gold": gold, "step_limit": 7}
        for ex, gold in zip(
            HOTPOTQA_EXEMPLARS["exemplars"],
            ["1,800 to 7,000 ft", "Richard Nixon", "The Saimaa Gesture",
             "director, screenwriter, actor", "Arthur's Magazine", "yes"],
        )
    ]
    dump_jsonl("tasks_hotpotqa.jsonl", hotpot)
    fever = [
        {"domain": "wiki-fever", "instruction": ex["instruction"], "gold": gold, "step_limit": 5}
        for ex, gold in zip(
            FEVER_EXEMPLARS["exemplars"], ["SUPPORTS", "REFUTES", "NOT ENOUGH INFO"]
        )
    ]
    dump_jsonl("tasks_fever.jsonl", fever)


def build_golden_prompts() -> None:
    """Snapshot the composed prompts once; tests pin these bytes."""
    from thoughtloop.fixtures import hotpotqa_exemplars
    from thoughtloop.parsing import LABELED
    from thoughtloop.prompts import AblationMode, compose_prompt
    from thoughtloop.trajectory import Trajectory

    golden = ROOT / "tests" / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    exemplar_set = hotpotqa_exemplars()
    syntax = SurfaceSyntax(LABELED)
    task = TaskSpec(domain="wiki-qa", instruction="Who is Milhouse named after?")
    for mode in (AblationMode.REACT, AblationMode.ACT, AblationMode.COT, AblationMode.STANDARD):
        prompt = compose_prompt(exemplar_set, mode, task, Trajectory(task), syntax)
        (golden / f"prompt_hotpotqa_{mode.value}.txt").write_text(prompt, encoding="utf-8")


def build_golden_wiki_observations() -> None:
    """Freeze the exact observation strings the wiki env emits."""
    from thoughtloop.envs.wiki import WikiCorpus, WikiEnv

    golden = ROOT / "tests" / "golden"
    golden.mkdir(parents=True, exist_ok=True)
    corpus = WikiCorpus.load(str(DATA / "wiki_corpus.jsonl"))

    env = WikiEnv(corpus)
    env.reset()
    observations = {
        "miss_recorded": env.search("Adam Clayton Powell"),
        "miss_computed": env.search("Beautiful Mind film"),
        "first5_of_3": env.search("Blue Heron"),
        "first5_of_5": env.search("Granite Peak"),
        "first5_of_7": env.search("Willow River"),
    }
    env.search("Willow River")
    observations["lookup_walk"] = [env.lookup("river") for _ in range(5)]
    env.search("Blue Heron")
    observations["lookup_zero"] = env.lookup("volcano")
    (golden / "wiki_observations.json").write_text(
        json.dumps(observations, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    build_wiki()
    build_qa_exemplars()
    build_references()
    build_household_demo()
    build_household_exemplars()
    build_shop()
    build_tasks()
    build_golden_prompts()
    build_golden_wiki_observations()
    print(f"fixtures written to {DATA}")


if __name__ == "__main__":
    main()
