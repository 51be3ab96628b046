"""PCA as a preprocessing stage for t-SNE.

The synthetic set has 40 class-bearing columns and 20 louder noise
columns. A short PCA keeps the noise directions, so t-SNE separates the
classes better once enough components are retained.
"""

import numpy as np

from projlab import metrics, pca, tsne
from projlab.synthetic import informative_plus_noise

X, y = informative_plus_noise(seed=0)
model = pca.fit(X, 50)
explained = np.cumsum(model.variances) / np.trace(np.cov(X, rowvar=False))
print("variance explained by 10/20/40 components:",
      ", ".join(f"{explained[d - 1]:.2f}" for d in (10, 20, 40)))

config = tsne.TsneConfig(perplexity=30, iterations=1000)
for dims in (10, 20, 40, None):
    emb = tsne.run(X, config, pca_dims=dims, labels=y)
    print(f"pca_dims={str(dims):>4}  silhouette {metrics.silhouette(emb):.4f}")
