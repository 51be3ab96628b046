"""How the number of LSP control points changes the layout of 10 blobs.

Few control points give each cluster a single anchor, so points collapse
tightly around it; many control points spread MDS placements across each
blob and the Laplacian averages them into a looser picture.
"""

from projlab import lsp, metrics
from projlab.synthetic import gaussian_blobs

X, y = gaussian_blobs(10, 100, dim=10, separation=10.0, seed=0)

print("CP   NN   silhouette  hit(10)")
for cp in (25, 50, 75):
    for nn in (10, 20):
        result = lsp.run_detailed(X, lsp.LspConfig(cp, nn), labels=y)
        emb = result.embedding
        hit = metrics.neighborhood_hit_curve(emb, 10)[9]
        print(f"{cp:<4d} {nn:<4d} {metrics.silhouette(emb):10.4f}  {hit:7.4f}")

# the pieces of a single run are exposed for inspection
result = lsp.run_detailed(X, lsp.LspConfig(25, 10), labels=y)
print("control points:", result.controls.indices[:10], "...")
print("k-medoids cost:", round(result.clusters.cost, 2), "after", len(result.clusters.cost_history), "rounds")
print("system shape:", result.system.A.shape, "nonzeros:", result.system.A.nnz)
