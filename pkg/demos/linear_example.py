"""Build and check the linear scheme for the bundled GF(3) instance.

Also shows why its capacity is 3/2 over GF(3) and 7/4 over larger fields.
"""

from cbcast import gf, lcb, library

inst = library.lcb_sec3()
scheme, report = lcb.build_scheme(inst)
dec = lcb.decompose(lcb.normalize(inst).inst)

print("partition sizes:", dec.counts())
print("broadcast columns (one per line):")
for col in scheme.s_cols.columns():
    print("  ", col)
print("cost:", scheme.cost_symbols, "symbols; capacity:", report.capacity_exact)
print("verification:", lcb.verify_scheme(inst, scheme).checks)

joint = gf.rank(gf.hstack(inst.V1, inst.V2))
print(f"rank[V1 V2] over GF(3) = {joint}  (2x1 + x2 = 2(x1 + 2x2) mod 3)")
for p in (5, 7):
    other = lcb.LinearCBInstance.from_columns(p, 7, inst.V1.columns(), inst.V1p.columns(), inst.V2.columns(), inst.V2p.columns())
    print(f"same coefficients over GF({p}): capacity {lcb.capacity(other)}")
