"""From a small confounded model to its mixing matrices and back again."""

import numpy as np

from lvsemme import build_w, enumerate_class, recover_aog, shuffle_and_scale, strip_measurement_columns
from lvsemme.fixtures import confounded_mleaf

np.set_printoptions(precision=3, suppress=True)

# H confounds the mleaf Z2 and the observed Y3; Z1 and Z2 are only seen through X1 and X2
model = confounded_mleaf(b2=0.7, a21=-1.3, b3=2.0)
print(model)

W = build_w(model)
print("\nW, columns", W.col_labels)
print(W.as_float())

# an estimator would hand back W with columns shuffled and rescaled
rng = np.random.default_rng(0)
seen = shuffle_and_scale(W, rng)
Wstar = strip_measurement_columns(seen)
print("\nafter dropping the measurement-error columns:", Wstar.col_labels)

grouping = recover_aog(Wstar)
print("\nrecovered grouping:", grouping)
for line in grouping.trace:
    print("  ", line)

# one cogent group per center; every group here is a singleton so the class has one member
(member,) = enumerate_class(Wstar, grouping)
print("\ncenters:", member.center_assignment)
print("B =", member.B.ravel(), " (latent column known only up to scale)")
print("C =", member.C.tolist())
print("D =", member.D.ravel())
print("nonzero parameters:", member.edge_count())
