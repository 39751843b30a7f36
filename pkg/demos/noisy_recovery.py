"""How far the support-based recovery survives a perturbed mixing matrix."""

from lvsemme import GeneratorConfig, RecoveryError, build_w_star, compute_aog, generate_model, perturb_matrix, recover_aog
from lvsemme.grouping import row_label_map

model = generate_model(GeneratorConfig(p_Y=2, p_ZC=2, p_ml=1, p_H=1, seed=3))
truth = compute_aog(model).relabel(rows=row_label_map(model)).signature()
W = build_w_star(model)
print(model)
print("true AOG:", compute_aog(model))

print("\n sigma    tol      correct / 20   errors")
for sigma in (1e-8, 1e-6, 1e-4, 1e-2):
    for tol in (1e-9, 1e-4, 1e-1):
        right = errors = 0
        for seed in range(20):
            try:
                right += recover_aog(perturb_matrix(W, sigma, seed), tol=tol).signature() == truth
            except RecoveryError:
                errors += 1
        print(f" {sigma:<8g} {tol:<8g} {right:>7}        {errors:>3}")
