"""Best zero-error single-letter code for the AND/OR toy problem versus its converse."""

from cbcast import distributions as dist
from cbcast import library, oracle

inst = library.andor()
ci = oracle.build_conflicts(inst)
rep = oracle.brute_capacity_L1(inst)

for atom, pr, color in zip(inst.atoms, inst.probs, rep.coloring):
    print(f"(w1, w1', w2, w2') = {atom}  p = {pr}  broadcast symbol {color}")
print("pairs that must differ:", sorted(ci.conflicts))
print(f"H(w1, w2) = {dist.entropy(inst, dist.W1 | dist.W2):.4f} bits")
print(f"single-letter H(S) = {rep.h_bits:.6f}, rate {rep.r1:.4f}; converse allows up to {rep.capacity_ub:.4f}")
