"""Where the checks bite: cancelling paths, proportional confounders and a removable latent."""

from lvsemme import (
    check_conventional_faithfulness,
    check_lvsemme_faithfulness,
    is_minimal,
    models_equal_mixing,
    reduce_latent,
)
from lvsemme.fixtures import cancelling_overlap, observed_chain, proportional_confounders

# Y1 -> Y2 -> Y3 cancels the direct Y1 -> Y3 edge exactly
chain = observed_chain(0.5, 2.0, -1.0)
print(check_conventional_faithfulness(chain).summary())
print(check_lvsemme_faithfulness(chain).summary().splitlines()[0])

# two confounders with proportional effects look like one: a rank deficit no single total effect shows
twins = proportional_confounders()
print("\nconventional:", check_conventional_faithfulness(twins).passed)
print(check_lvsemme_faithfulness(twins).summary())

# H can be folded into its mleaf child; the direct Y0 -> Y3 edge then cancels
model = cancelling_overlap()
ok, witness = is_minimal(model)
print("\nminimal:", ok, "witness:", witness)
dropped = []
smaller = reduce_latent(model, *witness, cancelled=dropped)
print("after reduction:", [f"{e.src}->{e.dst} {e.weight:.3g}" for e in smaller.edges])
print("cancelled:", dropped, " same W*:", models_equal_mixing(model, smaller))
