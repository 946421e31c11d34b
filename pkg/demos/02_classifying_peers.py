"""
From measurements to peer groups
================================

Given a fully measured snapshot per responder (credibility, computation
time, turnaround distance), peers fall into four quadrants against the
population averages, then the credibility threshold splits the good
quadrants into the final groups. PG1 is the set trusted with
deadline-driven work.
"""

from peergrid import (
    PeerSnapshot,
    classify_population,
    population_averages,
    select_efficient,
)

MU = 0.9

population = [
    #            peer        C_P   PC_T    D
    PeerSnapshot("ada",      0.98, 900.0, 0.6),   # credible, fast, near
    PeerSnapshot("babbage",  0.95, 850.0, 0.7),   # credible, fast, near
    PeerSnapshot("cantor",   0.97, 880.0, 4.0),   # credible and fast but far
    PeerSnapshot("dijkstra", 0.55, 920.0, 0.5),   # fast and near, not credible
    PeerSnapshot("erdos",    0.99, 300.0, 0.8),   # credible but rarely available
    PeerSnapshot("fermat",   0.40, 250.0, 5.0),   # nothing going for it
]

averages = population_averages(population)
print(f"averages over {averages.population_size} responders: "
      f"C_av={averages.credibility:.3f}  PC_av={averages.computation_time:.1f}s  "
      f"D_av={averages.distance:.2f}s/unit")
print()

groups = classify_population(population, MU)
for snap in population:
    coarse, group = groups[snap.peer_id]
    print(f"{snap.peer_id:9s} C={snap.credibility:.2f} PC_T={snap.computation_time:6.1f} "
          f"D={snap.distance:.2f}  ->  {coarse.value} -> {group.value}")

print()
efficient = select_efficient(population, MU)
print(f"efficient set (PG1) at mu={MU}: {sorted(efficient)}")
print("everyone else is barred from real-time task dispatch")
