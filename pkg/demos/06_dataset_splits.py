"""Site manifests and deterministic training splits.

Loads the shipped site table (eight reef survey sites with per-site image
counts, water types and diver depths), validates it, and builds the
canonical splits: all low-quality plus all reference images form the
unpaired training set, and the (good, reference) pairs divide into a paired
training set and a single-site test set.

Run: python demos/06_dataset_splits.py
"""

from uwrestore import build_splits, load_canonical_splits
from uwrestore.dataset import load_site_table_fixture


def main():
    manifest = load_site_table_fixture()
    print(f"{'site':>4} {'low':>6} {'good':>6} {'ref':>6}  water  depths (m)")
    for site in manifest.sites:
        water = site.water_type or "n/a"
        print(f"{site.site_id:>4} {site.low_quality_count:>6} "
              f"{site.good_quality_count:>6} {site.reference_count:>6}  "
              f"{water:<5}  {site.diver1_max_depth_m:.1f} / {site.diver2_max_depth_m:.1f}")
    totals = manifest.totals()
    print(f"{'sum':>4} {totals['low']:>6} {totals['good']:>6} {totals['reference']:>6}")

    print()
    split = build_splits(manifest, seed=0)
    print(f"unpaired training set : {len(split.unpaired_low)} low-quality "
          f"+ {len(split.unpaired_ref)} reference images")
    print(f"paired training set   : {len(split.paired_train)} (good, reference) pairs")
    sites = {good.split('_')[0] for good, _ in split.test}
    print(f"test set              : {len(split.test)} pairs, all from {sorted(sites)}")

    canonical = load_canonical_splits()
    print(f"matches shipped canonical split fixture: {split == canonical}")
    print()
    print("same seed -> same split; a different seed draws a different test set:")
    other = build_splits(manifest, seed=1)
    overlap = len(set(split.test) & set(other.test))
    print(f"seed 0 vs seed 1 test overlap: {overlap} of {len(split.test)} pairs")


if __name__ == "__main__":
    main()
