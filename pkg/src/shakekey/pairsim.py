"""Two-device pairing: each device derives its key alone, then keys are swapped.

Agents hold only their own trace. The channel carries PairingMessage values and
nothing else, and it records every message for later inspection.
"""
from __future__ import annotations

import re
import uuid
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidConfig, SessionNotFinished, ShakeKeyError
from .keygen import Key
from .matching import hamming_distance, keys_match
from .pipeline import PipelineConfig, derive_key
from .signal import AccelTrace

PAIRED = "paired"
DENIED = "denied"
_PAYLOAD = re.compile(r"^[01]+$")


@dataclass(frozen=True)
class PairingMessage:
    session_id: str
    sender: str
    key_bits: str
    nb: int

    def __post_init__(self):
        if not _PAYLOAD.match(self.key_bits):
            raise ValueError("a pairing message carries key bits only")


class Channel:
    """In-process, per-recipient FIFO with a full ordered transcript."""

    def __init__(self):
        self._queues = {}
        self._transcript = []

    def send(self, recipient: str, message: PairingMessage) -> None:
        if not isinstance(message, PairingMessage):
            raise TypeError("only PairingMessage values may cross the channel")
        self._queues.setdefault(recipient, deque()).append(message)
        self._transcript.append(message)

    def receive(self, recipient: str) -> Optional[PairingMessage]:
        q = self._queues.get(recipient)
        return q.popleft() if q else None

    @property
    def transcript(self) -> tuple:
        return tuple(self._transcript)


class DeviceAgent:
    """One device. Its only view of the peer is what arrives on the channel."""

    def __init__(self, device_id: str, trace: AccelTrace, config: PipelineConfig):
        self.device_id = device_id
        self._trace = trace
        self.config = config
        self.key: Optional[Key] = None
        self.error: Optional[str] = None

    def compute_key(self) -> Optional[Key]:
        try:
            self.key = derive_key(self._trace, self.config)
        except ShakeKeyError as exc:
            self.key, self.error = None, f"{type(exc).__name__}: {exc}"
        return self.key

    def announce(self, channel: Channel, session_id: str, peer_id: str) -> None:
        if self.key is not None:
            channel.send(peer_id, PairingMessage(session_id, self.device_id, self.key.bits, self.key.nb))

    def verdict(self, received: Optional[PairingMessage], mode: str, agree_fraction: float):
        """Return ``(verdict, hamming distance or None, diagnostic or None)``."""
        if self.key is None:
            return DENIED, None, f"{self.device_id}: no key ({self.error})"
        if received is None:
            return DENIED, None, f"{self.device_id}: no key received from peer"
        try:
            peer = Key(received.key_bits, received.nb)
            dist = hamming_distance(self.key, peer)
        except (ShakeKeyError, ValueError) as exc:
            return DENIED, None, f"{self.device_id}: incomparable peer key ({exc})"
        ok = keys_match(self.key, peer, mode, agree_fraction)
        return (PAIRED if ok else DENIED), dist, None


@dataclass(frozen=True)
class PairingOutcome:
    session_id: str
    verdicts: dict  # device id -> "paired" | "denied"
    hamming: Optional[int]
    mode: str
    agree_fraction: float
    transcript: tuple = field(repr=False)
    diagnostics: tuple = ()

    @property
    def paired(self) -> bool:
        return all(v == PAIRED for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "paired": self.paired,
            "verdicts": dict(self.verdicts),
            "hamming_distance": self.hamming,
            "mode": self.mode,
            "agree_fraction": self.agree_fraction,
            "diagnostics": list(self.diagnostics),
            "transcript": [
                {"sender": m.sender, "nb": m.nb, "key_bits": m.key_bits, "n_bits": len(m.key_bits)}
                for m in self.transcript
            ],
        }


class PairingSession:
    """Runs the exchange between two agents over a fresh channel."""

    def __init__(self, agent_a: DeviceAgent, agent_b: DeviceAgent, mode: str = "relaxed",
                 agree_fraction: float = 0.9, session_id: Optional[str] = None):
        if agent_a.device_id == agent_b.device_id:
            raise ValueError("agents need distinct device ids")
        self.agents = (agent_a, agent_b)
        self.mode = mode
        self.agree_fraction = agree_fraction
        self.session_id = session_id or uuid.uuid4().hex
        self.channel = Channel()
        self.outcome: Optional[PairingOutcome] = None

    def run(self) -> PairingOutcome:
        a, b = self.agents
        a.compute_key()
        b.compute_key()
        a.announce(self.channel, self.session_id, b.device_id)
        b.announce(self.channel, self.session_id, a.device_id)
        verdicts, dists, diags = {}, [], []
        for agent in (a, b):
            v, dist, diag = agent.verdict(self.channel.receive(agent.device_id), self.mode, self.agree_fraction)
            verdicts[agent.device_id] = v
            if dist is not None:
                dists.append(dist)
            if diag:
                diags.append(diag)
        self.outcome = PairingOutcome(
            self.session_id, verdicts, dists[0] if dists else None, self.mode,
            self.agree_fraction, self.channel.transcript, tuple(diags),
        )
        return self.outcome


def inspect_transcript(session: PairingSession) -> tuple:
    if session.outcome is None:
        raise SessionNotFinished(f"session {session.session_id} has not run")
    return session.channel.transcript


def run_pairing_session(trace_a: AccelTrace, trace_b: AccelTrace, config: PipelineConfig,
                        mode: Optional[str] = None, agree_fraction: Optional[float] = None,
                        session_id: Optional[str] = None) -> PairingOutcome:
    """Pair two devices that share one pre-provisioned config (bounds must be set).

    ``mode`` and ``agree_fraction`` default to the config's values.
    """
    if config.bounds is None:
        raise InvalidConfig("pairing needs pre-provisioned feature bounds")
    mode = mode or config.mode
    agree_fraction = config.agree_fraction if agree_fraction is None else agree_fraction
    session = PairingSession(
        DeviceAgent("device-1", trace_a, config),
        DeviceAgent("device-2", trace_b, config),
        mode, agree_fraction, session_id,
    )
    return session.run()
