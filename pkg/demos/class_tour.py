"""Every model sharing one mixing matrix, and which of them have the fewest edges."""

from lvsemme import (
    build_w_star,
    compute_aog,
    compute_dog,
    dog_filter,
    enumerate_class,
    enumerate_equivalents,
    models_equal_mixing,
    same_unlabeled_structure,
)
from lvsemme.fixtures import full_group, mleaf_aog_not_dog

# Z1 is a measured cause with an mleaf child Z2 and a confounder H: one group of three
model = full_group()
print("AOG:", compute_aog(model))
alternatives = enumerate_equivalents(model, compute_aog(model))
print(f"{len(alternatives)} models by switching the center and its noise")
for alt in alternatives:
    edges = ", ".join(f"{e.src}->{e.dst} {float(e.weight):.3g}" for e in alt.edges)
    print(f"  same W*: {models_equal_mixing(model, alt)}  edges: {edges}")

# the same class read off W* alone
members = enumerate_class(build_w_star(model))
print("\nfrom W*:", [m.center_assignment for m in members])
print("edge counts:", [m.edge_count() for m in members])

# here Z2's edge from Y0 is identifiable, so only the true center survives the edge count filter
model = mleaf_aog_not_dog()
print("\nAOG:", compute_aog(model))
print("DOG:", compute_dog(model))
members = enumerate_class(build_w_star(model))
kept = dog_filter(members)
print("edge counts:", [m.edge_count() for m in members], "-> kept", [m.center_assignment for m in kept])
print("kept model has the true structure:", same_unlabeled_structure(kept[0].to_model(), model))
