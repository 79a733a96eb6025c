import re
from dataclasses import replace

import numpy as np
import pytest

from shakekey.errors import InvalidConfig, SessionNotFinished
from shakekey.evaluation import calibrate_dataset_bounds
from shakekey.pairsim import (
    DENIED,
    PAIRED,
    Channel,
    DeviceAgent,
    PairingMessage,
    PairingSession,
    inspect_transcript,
    run_pairing_session,
)
from shakekey.pipeline import PipelineConfig, derive_key
from shakekey.signal import AccelTrace, SynthConfig, synth_independent_pair, synth_shared_pair


@pytest.fixture(scope="module")
def config(dataset):
    base = PipelineConfig(nb=4, kernel_size=5)
    return replace(base, bounds=calibrate_dataset_bounds(dataset, base))


def test_identical_traces_pair_strictly(config):
    a, _ = synth_shared_pair(SynthConfig(), 1)
    out = run_pairing_session(a, a, config, mode="strict")
    assert out.paired and out.hamming == 0
    assert set(out.verdicts.values()) == {PAIRED}


def test_independent_pairs_denied(config):
    # measured: 100 of 100 seeds denied in strict mode (and in relaxed mode)
    denied = sum(
        not run_pairing_session(*synth_independent_pair(SynthConfig(), s), config, mode="strict").paired
        for s in range(100)
    )
    assert denied >= 95


def test_transcript_shape(config):
    a, b = synth_shared_pair(SynthConfig(), 2)
    session = PairingSession(DeviceAgent("A", a, config), DeviceAgent("B", b, config), session_id="s1")
    with pytest.raises(SessionNotFinished):
        inspect_transcript(session)
    session.run()
    msgs = inspect_transcript(session)
    assert len(msgs) == 2
    assert {m.sender for m in msgs} == {"A", "B"}
    for m in msgs:
        assert isinstance(m, PairingMessage) and m.session_id == "s1"
        assert re.fullmatch(r"[01]{40}", m.key_bits) and m.nb == 4


def test_payload_length_independent_of_trace_length(config):
    cfg = SynthConfig(duration=9.0)
    a, b = synth_shared_pair(cfg, 3)
    assert len(a) > 900
    out = run_pairing_session(a, b, config)
    assert [len(m.key_bits) for m in out.transcript] == [40, 40]


def test_verdicts_symmetric(config):
    for seed in range(20):
        for make in (synth_shared_pair, synth_independent_pair):
            out = run_pairing_session(*make(SynthConfig(), seed), config)
            assert len(set(out.verdicts.values())) == 1


def test_agent_key_depends_only_on_own_trace(config):
    a, b = synth_shared_pair(SynthConfig(), 4)
    _, other = synth_independent_pair(SynthConfig(), 99)
    s1 = PairingSession(DeviceAgent("A", a, config), DeviceAgent("B", b, config))
    s2 = PairingSession(DeviceAgent("A", a, config), DeviceAgent("B", other, config))
    s1.run()
    s2.run()
    assert s1.agents[0].key == s2.agents[0].key == derive_key(a, config)


def test_failed_device_is_denied(config):
    a, _ = synth_shared_pair(SynthConfig(), 5)
    flat = AccelTrace(100.0, np.zeros((600, 3)))
    out = run_pairing_session(a, flat, config)
    assert not out.paired
    assert set(out.verdicts.values()) == {DENIED}
    assert any("NoBumpDetected" in d for d in out.diagnostics)
    assert len(out.transcript) == 1


def test_missing_bounds_rejected():
    a, b = synth_shared_pair(SynthConfig(), 0)
    with pytest.raises(InvalidConfig):
        run_pairing_session(a, b, PipelineConfig())


def test_channel_carries_messages_only():
    ch = Channel()
    with pytest.raises(TypeError):
        ch.send("B", b"raw samples")
    with pytest.raises(ValueError):
        PairingMessage("s", "A", "0.5,1.2", 4)
    ch.send("B", PairingMessage("s", "A", "01", 1))
    ch.send("B", PairingMessage("s", "A", "10", 1))
    assert ch.receive("B").key_bits == "01" and ch.receive("B").key_bits == "10"
    assert ch.receive("B") is None


def test_sequential_runs_are_deterministic(config):
    a, b = synth_shared_pair(SynthConfig(), 6)
    o1 = run_pairing_session(a, b, config, session_id="x")
    o2 = run_pairing_session(a, b, config, session_id="x")
    assert o1.to_dict() == o2.to_dict()
