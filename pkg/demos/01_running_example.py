"""
From clauses to graphs
======================

A decrement loop written as Horn clauses, its normal form, both graph
encodings, and the labels of the proxy tasks.
"""
from importlib.resources import files

from horngraphs import (add_self_loops, build_cdhg, build_cg, catalog, count_rs_occurrences,
                        emit_dot, make_labels, normalize, parse_system, scc_membership)
from horngraphs.labels import bound_labels

text = files("horngraphs").joinpath("data/running_example.chc").read_text()
print(text)
system = parse_system(text)

# %% normal form: the loop's body atom becomes a copy symbol L' with its own
# argument vector, and each constraint is either a guard or a dataflow
ns = normalize(system)
for c in ns.clauses:
    print(c.as_clause())
    print("    guards:   ", [str(g) for g in c.guards])
    print("    dataflows:", [str(d) for d in c.dataflows])

# %% the two encodings; CG keeps the syntax tree, CDHG keeps control and data flow
cg, cdhg = build_cg(system), build_cdhg(ns)
print("CG  ", cg.num_nodes, "nodes", cg.type_histogram())
print("CDHG", cdhg.num_nodes, "nodes", cdhg.type_histogram())
print(emit_dot(cdhg)[:400], "...")

# %% labels
print("occurrences:", count_rs_occurrences(ns).values)
print("on a cycle: ", scc_membership(ns).values)
lower, upper = bound_labels(ns, symbols=["L"])
print("bounded below:", lower.values)
print("bounded above:", upper.values)

# what the network actually sees: node-keyed labels on the graph with self loops
g = add_self_loops(cdhg)
print(make_labels(system, g, "T3").values)
print("relations:", catalog("CDHG").relations)
