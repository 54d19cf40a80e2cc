import dataclasses
import math

import numpy as np
import pytest
from fastapi.testclient import TestClient

from confplan import wire
from confplan.scenario import scenario_from_dict
from confplan.server import create_app
from confplan.simulation import SimSession
from confplan.trajectories import position_at


def scenario(**over):
    base = {
        "human": {"start": [0.55, 0.55], "trajectory": {"kind": "direct"}},
        "model": {"goals": [[3.05, 3.05]]},
        "robot": {"start": [0.55, 3.1, 1.0], "goal": [3.1, 0.55, 1.0]},
        "sim": {"timeout": 30.0},
    }
    base.update(over)
    return scenario_from_dict(base)


SAMPLE_MESSAGES = [
    wire.hello(),
    wire.human_move(1, 0),
    wire.human_move(0, -1),
    wire.tick(),
    wire.error("boom"),
    wire.heartbeat(1.25),
    wire.ack(1, 1),
]


def test_wire_round_trip_identity():
    for msg in SAMPLE_MESSAGES:
        assert wire.parse(wire.serialize(msg)) == msg


def test_wire_rejects_bad_messages():
    with pytest.raises(wire.WireError):
        wire.parse("not json")
    with pytest.raises(wire.WireError):
        wire.parse('{"v": 2, "type": "hello"}')
    with pytest.raises(wire.WireError):
        wire.parse('{"v": 1, "type": "warp"}')
    with pytest.raises(wire.WireError):
        wire.parse('{"v": 1, "type": "human_move", "dx": 3, "dy": 0}')


def ws_session(cfg):
    app = create_app(cfg, tick_hz=0.0)
    return TestClient(app)


def send(ws, msg):
    ws.send_text(wire.serialize(msg))
    return wire.parse(ws.receive_text())


def test_hello_returns_config():
    cfg = scenario()
    with ws_session(cfg) as client:
        with client.websocket_connect("/ws") as ws:
            reply = send(ws, wire.hello())
            assert reply["type"] == "config"
            assert reply["arena"]["cols"] == 24
            assert reply["human_cell"] == [3, 3]
            assert len(reply["betas"]) == 10
            assert reply["p_threshold"] == 0.01


def test_stay_tick_and_move_round_trip():
    cfg = scenario()
    with ws_session(cfg) as client:
        with client.websocket_connect("/ws") as ws:
            send(ws, wire.hello())
            # No queued input: human stays put.
            update = send(ws, wire.tick())
            assert update["type"] == "state_update"
            assert update["human_cell"] == [3, 3]
            assert update["step"] == 1
            # Queue one move north-east; it lands on the next tick.
            reply = send(ws, wire.human_move(1, 1))
            assert reply["type"] == "ack"
            update = send(ws, wire.tick())
            assert update["human_cell"] == [4, 4]
            # Belief marginal stays a distribution.
            probs = update["belief"]["probs"]
            assert math.fsum(probs) == pytest.approx(1.0, abs=1e-9)
            assert update["plan"]["waypoints"]
            assert len(update["plan"]["waypoints"]) <= cfg.planner.horizon + 1


def test_wall_move_rejected_state_unchanged():
    cfg = scenario(human={"start": [0.1, 0.1],
                          "trajectory": {"kind": "direct"}})
    with ws_session(cfg) as client:
        with client.websocket_connect("/ws") as ws:
            send(ws, wire.hello())
            reply = send(ws, wire.human_move(-1, 0))
            assert reply["type"] == "error"
            update = send(ws, wire.tick())
            assert update["human_cell"] == [0, 0]


def test_unknown_message_gets_error_reply():
    cfg = scenario()
    with ws_session(cfg) as client:
        with client.websocket_connect("/ws") as ws:
            ws.send_text('{"v": 1, "type": "teleport"}')
            reply = wire.parse(ws.receive_text())
            assert reply["type"] == "error"


def replay_moves(cfg, horizon_time):
    """Observed (dx, dy) per human step when replaying the trajectory."""
    sess = SimSession(cfg)
    seq = []
    cell = sess.human_cell
    k = 1
    while k * sess.human_dt <= horizon_time + 1e-9:
        xy = position_at(sess.trajectory, k * sess.human_dt)
        new = sess.arena.snap(*xy, prev=cell)
        dx = min(max(new[0] - cell[0], -1), 1)
        dy = min(max(new[1] - cell[1], -1), 1)
        seq.append((dx, dy))
        cell = (cell[0] + dx, cell[1] + dy)
        k += 1
    return seq


def test_scripted_transcript_matches_batch_run():
    # Replaying the direct walk through the protocol reproduces the batch
    # simulator's belief exactly and its metrics to within one tick.
    cfg = scenario()
    batch = SimSession(dataclasses.replace(cfg))
    metrics = batch.run()

    # Cover the completion instant even when it falls between human steps.
    moves = replay_moves(cfg, metrics.completion_time + 2 * batch.human_dt)
    at_batch_end = None
    with ws_session(cfg) as client:
        with client.websocket_connect("/ws") as ws:
            send(ws, wire.hello())
            update = None
            for dx, dy in moves:
                if (dx, dy) != (0, 0):
                    assert send(ws, wire.human_move(dx, dy))["type"] == "ack"
                update = send(ws, wire.tick())
                if update["step"] == batch.step_count:
                    at_batch_end = update

    np.testing.assert_allclose(at_batch_end["belief"]["probs"],
                               batch.belief.beta_marginal(), atol=1e-9)
    assert update["metrics"]["completed"]
    assert update["metrics"]["completion_time"] == pytest.approx(
        metrics.completion_time, abs=batch.human_dt + 1e-9)
    # Continuous replay metrics differ from cell-center live metrics by at
    # most one cell diagonal.
    cell_diag = math.sqrt(2) * cfg.cell_size
    assert update["metrics"]["min_ground_distance"] == pytest.approx(
        metrics.min_ground_distance, abs=cell_diag + 1e-9)


def test_payload_occupancy_matches_prediction_dump(tmp_path):
    from confplan.prediction import write_occupancy, read_occupancy

    cfg = scenario()
    with ws_session(cfg) as client:
        with client.websocket_connect("/ws") as ws:
            send(ws, wire.hello())
            update = None
            for _ in range(4):
                update = send(ws, wire.tick())

    # Rebuild the same forecast tick by tick and compare the sparse payload
    # against the dump of the in-memory grids.
    live = SimSession(cfg, live=True)
    for _ in range(4):
        live.live_tick(0, 0)
    pred = live.prediction
    path = tmp_path / "occ.csv"
    write_occupancy(pred, path)
    back = read_occupancy(path, arena=live.arena)
    for tau, row, col, p in update["occupancy"]["cells"]:
        assert back.grids[tau, row, col] == pytest.approx(p, abs=1e-12)
    # The top cell of every step is present in the payload.
    for tau in range(pred.horizon + 1):
        flat = pred.grids[tau].ravel()
        best = int(np.argmax(flat))
        ny = pred.grids[tau].shape[1]
        assert any(c[0] == tau and c[1] == best // ny and c[2] == best % ny
                   for c in update["occupancy"]["cells"])
