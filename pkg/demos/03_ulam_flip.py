"""The Ulam-Harris embedding and the zone flip.

Children are placed in slots 1, 2, ... by label, so each vertex gets a word
of positive integers; its zone is the digit sum. Encoding words as bit
strings and complementing bits 2..j gives an involution on trees that keeps
every zone and the subtrees hanging below zone j.
"""

from leafstrip.rootfind import m_n
from leafstrip.treegen import generate_rrt
from leafstrip.ulam import embed_phi, flip_tree, format_embedding, tall_zone_set, verify_flip_properties, zone

t = generate_rrt(9, seed=3)
print(format_embedding(t))

tb = flip_tree(t, 4)
print("parents      ", t.parents())
print("flipped (j=4)", tb.parents())
print("involution   ", flip_tree(tb, 4) == t)
print("zones kept   ", [zone(u) for _, u in embed_phi(t).items()] == [zone(u) for _, u in embed_phi(tb).items()])

big = generate_rrt(20_000, seed=11)
for k in (1, 2, 3):
    rep = verify_flip_properties(big, k)
    # at the default threshold m_n - k the tall set is usually empty
    sizes = {h: len(tall_zone_set(big, 4 * k, h)) for h in (m_n(big.n) - k, 12, 8)}
    print(f"k={k}: tall zone-{4 * k} vertices by height threshold {sizes}, "
          f"checks {'pass' if rep.passed else rep.failures()}")
