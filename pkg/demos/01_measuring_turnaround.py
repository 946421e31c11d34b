"""
Measuring peer distance from ordinary task traffic
==================================================

A task distributor never pings anybody. It writes down when each batch
left (the TaskID table), and when the result comes back it computes the
per-unit turnaround and folds it into the Turnaround-Time table. This
script walks through that bookkeeping by hand.
"""

import random

from peergrid import (
    PeerProfile,
    TaskIdTable,
    TurnaroundTable,
    lookup_distance,
    record_dispatch,
    record_result_distance,
    simulate_batch,
)

# A peer 100 ms away that takes one second per task unit.
peer = PeerProfile(
    peer_id="worker-7",
    processing_seconds_per_unit=1.0,
    one_way_latency=0.1,
)
rng = random.Random(0)

task_ids = TaskIdTable()
turnaround = TurnaroundTable(alpha=0.5)

# Dispatch a single unit at t=0 and feed the reply back through the tables.
record_dispatch(task_ids, "t1", peer.peer_id, 1, now=0.0)
kind, reply_time = simulate_batch(peer, 1, 0.0, rng)
record_result_distance(task_ids, turnaround, "t1", reply_time)
print(f"single unit: result={kind.value}, reply at {reply_time:.3f}s")
print(f"  per-unit distance = {lookup_distance(turnaround, peer.peer_id):.3f}s "
      "(two latencies + one unit of processing)")

# A batch of four units: one round trip amortized over n units, so the
# per-unit figure drops.
record_dispatch(task_ids, "t2", peer.peer_id, 4, now=10.0)
kind, reply_time = simulate_batch(peer, 4, 10.0, rng)
record_result_distance(task_ids, turnaround, "t2", reply_time)
print(f"batch of 4: reply at {reply_time:.3f}s")
print(f"  smoothed estimate = {lookup_distance(turnaround, peer.peer_id):.4f}s/unit "
      "(EWMA of 1.200 and 1.050)")

# The table keeps one row per peer we have heard from.
for peer_id, estimate, samples in turnaround.rows():
    print(f"turnaround table: {peer_id} -> {estimate:.4f}s/unit from {samples} samples")
