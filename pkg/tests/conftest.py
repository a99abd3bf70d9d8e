import pytest

from oprules.dataset import load_micro_dataset
from oprules.demo import write_demo_fixture
from oprules.gateway import LlmGateway, ScriptedProvider
from oprules.lexicon import extract_operators
from oprules.optree import (
    BackgroundNode,
    Layer,
    OpRule,
    OpTree,
    Provenance,
    ReasoningNode,
)
from oprules.trainer import TrainConfig, train


@pytest.fixture(scope="session")
def micro_pairs():
    return load_micro_dataset()


@pytest.fixture(scope="session")
def demo_fixture_path(tmp_path_factory):
    return write_demo_fixture(tmp_path_factory.mktemp("fixture") / "demo.jsonl")


@pytest.fixture(scope="session")
def demo_provider(demo_fixture_path):
    return ScriptedProvider.from_jsonl(demo_fixture_path)


@pytest.fixture()
def gateway(demo_provider):
    return LlmGateway(demo_provider)


@pytest.fixture(scope="session")
def trained_library(demo_fixture_path, tmp_path_factory):
    out = tmp_path_factory.mktemp("lib") / "library.jsonl"
    gw = LlmGateway(ScriptedProvider.from_jsonl(demo_fixture_path))
    config = TrainConfig(max_iterations=3, questions_per_layer=1, rng_seed=11)
    path, log = train(load_micro_dataset(), config, gw, out)
    return path, log


def make_handshake_tree(
    tree_id: str = "t-handshake",
    nl: str = "When a request is asserted, the grant must be given in the same cycle.",
    golden: str = "req |-> gnt",
    failing: str = "req |=> gnt",
    valid: bool = False,
) -> OpTree:
    """Single-path diagnosis/grounding/rule tree for the overlap-vs-nonoverlap
    implication confusion."""
    background = BackgroundNode(
        nl_spec=nl,
        design_context=(("req", 1), ("gnt", 1)),
        golden_sva=golden,
        failing_sva=failing,
    )
    diag_answer = "gnt is expected in the very cycle req is asserted, not a cycle later."
    ground_answer = (
        "Overlapping implication |-> evaluates its consequent in the cycle of the "
        "antecedent match, while non-overlapping |=> shifts it one cycle later."
    )
    rule_answer = "Replace |=> with |-> so gnt is checked in the same cycle as req."
    nodes = {
        "d00": ReasoningNode(
            "d00", Layer.CONTEXTUAL_DIAGNOSIS,
            "In which cycle must gnt be checked relative to req?",
            diag_answer, extract_operators(diag_answer), None,
        ),
        "d00.g00": ReasoningNode(
            "d00.g00", Layer.THEORETICAL_GROUNDING,
            "What formally distinguishes |-> from |=>?",
            ground_answer, extract_operators(ground_answer), "d00",
        ),
        "d00.g00.r00": ReasoningNode(
            "d00.g00.r00", Layer.RULE_GENERATION,
            "Which operator change fixes the assertion?",
            rule_answer, extract_operators(rule_answer), "d00.g00",
            rule=OpRule(rule_answer, extract_operators(rule_answer)),
        ),
    }
    return OpTree(
        id=tree_id,
        background=background,
        nodes=nodes,
        root_ids=("d00",),
        valid=valid,
        created_iteration=1,
        provenance=Provenance("unit", "item-1"),
    )
