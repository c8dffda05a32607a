"""Score the bundled experiment counts for all three memory games.

For each family, p and source prints the recomputed score with its
three-sigma shot-noise error, the published score, and the certified
robustness lower bound.
"""

from qmem import io


def main():
    print(f"{'family':10s} {'p':>5s} {'source':7s} {'score':>8s} {'3 sigma':>8s} {'published':>9s} {'R bound':>8s}")
    for name in ("dephasing", "erasure", "damping"):
        for rec in io.shipped_counts(name):
            score, std, bound = io.ingest_counts(rec)
            print(f"{name:10s} {rec.meta['p']:5.2f} {rec.meta['source']:7s} {score:8.4f} {3 * std:8.4f} "
                  f"{rec.meta['published_score']:9.4f} {bound:8.4f}")


if __name__ == "__main__":
    main()
