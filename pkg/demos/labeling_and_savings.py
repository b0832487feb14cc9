#!/usr/bin/env python3
"""Label a synthetic clip population and tabulate the pixel savings.

Walks the full labeling path: sample clips, build quality grids per bitrate,
select efficient modes within the 0.25 JOD margin, then print the mean
savings as the allowed quality drop grows and where the selections land.
"""

from collections import Counter

from adastream import savings_curve, selection_distribution
from adastream.labeler import label_grids
from adastream.synth import grids_for_clips, sample_clips

N_CLIPS = 150
MARGINS = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.35, 0.5]


def main():
    clips = sample_clips(N_CLIPS, seed=42)
    grids = grids_for_clips(clips)
    print(f"{N_CLIPS} clips x {len(grids) // N_CLIPS} bitrates "
          f"= {len(grids)} quality grids")

    curve = savings_curve(grids, MARGINS)
    print("\nmean % reduction in pixels/s vs the max-quality mode:")
    print("margin  " + "".join(f"{m:>7.2f}" for m in MARGINS))
    for bitrate in sorted(curve):
        row = "".join(f"{curve[bitrate][m]:7.1f}" for m in MARGINS)
        print(f"{bitrate / 1e6:.0f} Mbps {row}")

    labels = label_grids(grids, 0.25)
    hist = selection_distribution(labels)
    print("\nmost common efficient modes per bitrate (velocity band in name):")
    band_names = ("slow", "medium", "fast")
    by_bitrate = {}
    for (bitrate, band, f, h), count in hist.items():
        by_bitrate.setdefault(bitrate, Counter())[
            f"{h}p{f} {band_names[band]}"] += count
    for bitrate in sorted(by_bitrate):
        top = ", ".join(f"{name} x{n}"
                        for name, n in by_bitrate[bitrate].most_common(5))
        print(f"{bitrate / 1e6:.0f} Mbps: {top}")

    slow = [lab for lab in labels if lab.velocity_degps < 10]
    fast = [lab for lab in labels if lab.velocity_degps > 50]
    mean_f = lambda labs: sum(l.efficient_mode.frame_rate_hz for l in labs) / len(labs)
    print(f"\nmean selected frame rate: {mean_f(slow):.0f} Hz below 10 deg/s, "
          f"{mean_f(fast):.0f} Hz above 50 deg/s")


if __name__ == "__main__":
    main()
