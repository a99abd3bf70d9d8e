"""Adapter for an external (commercial) equivalence checker.

The adapter shells out to a user-supplied command once in strict mode and,
when strict equivalence is not established, once in relaxed mode. Command
templates receive {golden_file}, {generated_file} and {mode} placeholders;
stdout is matched against configurable pass patterns. Never invoked by the
default test suite.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ToolNotFound, ToolParseError
from .equivalence import EquivalenceVerdict, Verdict


@dataclass(frozen=True)
class ExternalCheckerConfig:
    command: str  # e.g. "check_sva.sh {golden_file} {generated_file} {mode}"
    strict_pass: str = r"\bEQUIVALENT\b"
    relaxed_pass: str = r"\bRELAXED_ONLY\b|\bEQUIVALENT\b"
    timeout: float = 300.0
    extra_context: dict = field(default_factory=dict)


def _run(config: ExternalCheckerConfig, mode: str, golden_file: str, generated_file: str) -> str:
    command = config.command.format(
        golden_file=golden_file, generated_file=generated_file, mode=mode,
        **config.extra_context,
    )
    try:
        proc = subprocess.run(
            shlex.split(command),
            capture_output=True,
            text=True,
            timeout=config.timeout,
        )
    except FileNotFoundError as exc:
        raise ToolNotFound(str(exc)) from exc
    if proc.returncode != 0:
        raise ToolParseError(
            f"checker exited {proc.returncode} in {mode} mode: {proc.stderr.strip()[:500]}"
        )
    if not proc.stdout.strip():
        raise ToolParseError(f"checker produced no output in {mode} mode")
    return proc.stdout


def external_checker(
    config: ExternalCheckerConfig, golden: str, generated: str
) -> EquivalenceVerdict:
    """Verdict from the external tool.

    Strict-mode pass means EQUIVALENT; otherwise a relaxed-mode pass means
    GOLDEN_IMPLIES_GENERATED; otherwise INCOMPARABLE. The reverse implication
    is not derivable from the two-script protocol, and no counterexample
    trace is available from external tools.
    """
    with tempfile.TemporaryDirectory(prefix="oprules-ext-") as tmp:
        golden_file = Path(tmp) / "golden.sva"
        generated_file = Path(tmp) / "generated.sva"
        golden_file.write_text(golden + "\n", encoding="utf-8")
        generated_file.write_text(generated + "\n", encoding="utf-8")

        out = _run(config, "strict", str(golden_file), str(generated_file))
        if re.search(config.strict_pass, out):
            return EquivalenceVerdict(Verdict.EQUIVALENT)
        out = _run(config, "relaxed", str(golden_file), str(generated_file))
        if re.search(config.relaxed_pass, out):
            return EquivalenceVerdict(Verdict.GOLDEN_IMPLIES_GENERATED)
        return EquivalenceVerdict(Verdict.INCOMPARABLE)


class ExternalOracle:
    """Drop-in replacement for BoundedOracle backed by the adapter."""

    name = "external"

    def __init__(self, config: ExternalCheckerConfig):
        self.config = config

    def check(self, golden_text: str, generated_text: str) -> EquivalenceVerdict:
        return external_checker(self.config, golden_text, generated_text)

    def equivalent(self, golden_text: str, generated_text: str) -> bool:
        return self.check(golden_text, generated_text).equivalent
