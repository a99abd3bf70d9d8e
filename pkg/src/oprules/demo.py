"""Scripted-provider fixture for the bundled micro dataset.

Each failing item follows the same arc: the first generation picks a wrong
operator, the three reasoning layers isolate the mistake, and regeneration
under the resulting rule reproduces the reference assertion. Two items start
out correct. The fixture is routed by distinctive phrases of each item's
specification, so it drives both the training demo and an inference pass
over the same dataset.

Regenerate the committed copy with ``python -m oprules.demo fixtures/demo.jsonl``.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path

from .dataset import NlSvaPair, load_micro_dataset


@dataclass(frozen=True)
class DemoScenario:
    phrase: str  # distinctive substring of the item's specification
    init_sva: str
    diagnosis: tuple[str, str] = ("", "")
    grounding: tuple[str, str] = ("", "")
    rule: tuple[str, str] = ("", "")


SCENARIOS: dict[str, DemoScenario] = {
    "micro-01": DemoScenario(
        phrase="grant must be given in the same cycle",
        init_sva="req |=> gnt",
        diagnosis=(
            "Which cycle relationship between req and gnt does the design expect?",
            "The grant is tied combinationally to the request, so gnt must be checked in the very cycle req is high.",
        ),
        grounding=(
            "What formally separates |-> from |=>?",
            "Overlapping implication |-> evaluates its consequent in the cycle of the antecedent match; non-overlapping |=> shifts evaluation to the following cycle.",
        ),
        rule=(
            "Which operator change fixes the assertion?",
            "Replace |=> with |-> so gnt is required in the same cycle as req.",
        ),
    ),
    "micro-02": DemoScenario(
        phrase="One cycle after a request",
        init_sva="req |-> ack",
        diagnosis=(
            "When is ack expected relative to req?",
            "The acknowledge is registered, so ack appears one cycle after req, not together with it.",
        ),
        grounding=(
            "Which implication operator encodes a one-cycle shift?",
            "Non-overlapping implication |=> checks its consequent starting one cycle after the antecedent match, unlike |->.",
        ),
        rule=(
            "How should the implication be written?",
            "Use |=> instead of |-> because ack is expected one cycle after req.",
        ),
    ),
    "micro-03": DemoScenario(
        phrase="exactly two cycles after",
        init_sva="req |-> ##1 gnt",
        diagnosis=(
            "How many cycles separate req and gnt?",
            "The datapath takes two full cycles, so gnt arrives two cycles after req, not one.",
        ),
        grounding=(
            "What does the ##m delay operator mean?",
            "##m advances exactly m clock cycles between sequence elements, so ##2 places the consequent two cycles later.",
        ),
        rule=(
            "Which delay count is correct?",
            "Keep |-> and use ##2 so gnt is checked exactly two cycles after req.",
        ),
    ),
    "micro-04": DemoScenario(
        phrase="within one to three cycles",
        init_sva="start |-> ##1 done",
        diagnosis=(
            "Is the completion latency of done fixed?",
            "No; done may arrive anywhere from one to three cycles after start, so a fixed delay is too strict.",
        ),
        grounding=(
            "How does a delay window differ from a fixed delay?",
            "The window form ##[m:n] matches at any separation between m and n cycles, whereas ##m fixes one separation.",
        ),
        rule=(
            "How should the latency be encoded?",
            "Use the delay window ##[1:3] after |-> so done may arrive between one and three cycles later.",
        ),
    ),
    "micro-05": DemoScenario(
        phrase="enable signal rises",
        init_sva="$fell(en) |-> busy",
        diagnosis=(
            "Which edge of en should trigger the check?",
            "The unit reacts to en turning on, so the trigger is the rising edge of en, not the falling one.",
        ),
        grounding=(
            "What do $rose and $fell sample?",
            "$rose(sig) is true when sig is 1 now and was 0 a cycle earlier; $fell(sig) is the mirror case for a falling edge.",
        ),
        rule=(
            "Which sampling function is right here?",
            "Use $rose(en) rather than $fell(en) to detect the rising edge, keeping |-> for the same-cycle busy check.",
        ),
    ),
    "micro-06": DemoScenario(
        phrase="busy flag falls",
        init_sva="$fell(busy) |-> done",
        diagnosis=(
            "In which cycle is done asserted relative to the fall of busy?",
            "done is registered after the falling edge, so it shows up in the next cycle, not the fall cycle itself.",
        ),
        grounding=(
            "Which implication operator defers the consequent by a cycle?",
            "Non-overlapping implication |=> starts the consequent one cycle after the antecedent match.",
        ),
        rule=(
            "What is the corrected structure?",
            "Keep $fell(busy) but use |=> so done is sampled one cycle after the fall.",
        ),
    ),
    "micro-07": DemoScenario(
        phrase="keep its previous value",
        init_sva="halt |=> $stable(mode)",
        diagnosis=(
            "From which cycle must mode hold its value?",
            "The freeze applies in the same cycle halt is high; deferring the check by one cycle lets a glitch through.",
        ),
        grounding=(
            "How does $stable interact with the implication choice?",
            "$stable(sig) compares against the previous cycle, so with |-> the comparison covers the halt cycle itself; |=> would skip it.",
        ),
        rule=(
            "Which implication operator should guard the stability check?",
            "Use |-> with $stable(mode) so the stability requirement starts in the halt cycle.",
        ),
    ),
    "micro-08": DemoScenario(
        phrase="fetch was active two cycles earlier",
        init_sva="commit |-> $past(fetch, 1)",
        diagnosis=(
            "How deep must the history lookup go?",
            "The pipeline is two stages, so commit relates to fetch from two cycles back, not the immediately previous cycle.",
        ),
        grounding=(
            "What does the depth argument of $past select?",
            "$past(expr, d) samples expr exactly d cycles earlier, so $past(fetch, 2) reads the value two cycles back.",
        ),
        rule=(
            "How should the history check be written?",
            "Use $past(fetch, 2) with |-> because fetch must have been active two cycles before commit.",
        ),
    ),
    "micro-09": DemoScenario(
        phrase="eventually be granted",
        init_sva="req |-> gnt",
        diagnosis=(
            "Must the grant land in the request cycle?",
            "No; the arbiter may take arbitrarily long, so demanding gnt in the same cycle as req over-constrains the design.",
        ),
        grounding=(
            "Which liveness operator captures an unbounded but mandatory event?",
            "s_eventually requires its operand to hold at some later cycle and fails if the trace ends first.",
        ),
        rule=(
            "How should the consequent be weakened?",
            "Wrap the consequent as s_eventually gnt under |-> because the grant may arrive any number of cycles later.",
        ),
    ),
    "micro-10": DemoScenario(
        phrase="lock is engaged",
        init_sva="lock |-> !err",
        diagnosis=(
            "Does the error check cover only the lock cycle?",
            "The requirement is persistent: once lock is high, err must stay low in every following cycle, not just the first.",
        ),
        grounding=(
            "Which operator extends a condition over all remaining cycles?",
            "s_always requires its operand at every remaining cycle of the trace, turning a one-cycle check into an invariant.",
        ),
        rule=(
            "What is the corrected consequent?",
            "Use s_always !err as the consequent of |-> so the error flag stays low from the lock cycle on.",
        ),
    ),
    "micro-11": DemoScenario(
        phrase="never be active together",
        init_sva="!(rd && wr)",
    ),
    "micro-12": DemoScenario(
        phrase="match the ready flag",
        init_sva="sel |-> valid == ready",
    ),
}


def demo_records(pairs: list[NlSvaPair] | None = None) -> list[dict]:
    pairs = pairs if pairs is not None else load_micro_dataset()
    records: list[dict] = []
    for pair in pairs:
        scenario = SCENARIOS[pair.id]
        records.append(
            {
                "kind": "generate_sva",
                "match": {"nl_spec": scenario.phrase, "rules": "(none)"},
                "response": scenario.init_sva,
            }
        )
        if scenario.init_sva != pair.golden_sva:
            for layer, (question, answer) in (
                ("contextual_diagnosis", scenario.diagnosis),
                ("theoretical_grounding", scenario.grounding),
                ("rule_generation", scenario.rule),
            ):
                records.append(
                    {
                        "kind": "build_op_tree_layer",
                        "match": {"nl_spec": scenario.phrase, "layer": layer},
                        "response": f"Q: {question}\nA: {answer}",
                    }
                )
        records.append(
            {
                "kind": "generate_sva",
                "match": {"nl_spec": scenario.phrase, "rules": "Rule 1:"},
                "response": pair.golden_sva,
            }
        )
    # inference-time catch-alls: a confident judge and a generic adaptation
    records.append({"kind": "judge_applicability", "match": {}, "response": "0.8"})
    records.append(
        {
            "kind": "adapt_rules",
            "match": {},
            "response": "Use |-> so the consequent is checked in the same cycle as the antecedent match.",
        }
    )
    return records


def write_demo_fixture(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for record in demo_records():
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    return path


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "fixtures/demo.jsonl"
    print(f"wrote {write_demo_fixture(out)}")
