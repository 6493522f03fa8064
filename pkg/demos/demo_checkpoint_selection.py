#!/usr/bin/env python3
"""Why loss curves mislead, and how perceptual ranking picks checkpoints.

Two fine-tuning runs with identical, smoothly decreasing validation loss:
one speaker's perceptual quality rises with the loss, the other's collapses
early and only partially recovers. The divergence detector flags the second
run; the ranker ignores loss entirely and orders checkpoints by MOS.
"""

from voxgauge import CheckpointPoint, detect_divergence, rank_checkpoints

STEPS = (0, 500, 1000, 2000, 4000)
VAL_LOSS = (2.10, 1.62, 1.31, 1.18, 1.12)

RUNS = {
    "diverse-data speaker": (3.72, 3.90, 4.14, 4.11, 4.06),
    "homogeneous-data speaker": (3.65, 3.41, 3.23, 3.31, 3.35),
}


def main():
    for name, mos_curve in RUNS.items():
        series = [CheckpointPoint(step=s, val_loss=l, mos=m)
                  for s, l, m in zip(STEPS, VAL_LOSS, mos_curve)]
        finding = detect_divergence(series)
        ranking = rank_checkpoints(series, weights=(1.0, 0.0, 0.0))

        print(name)
        print(f"  val loss fell {VAL_LOSS[0]:.2f} -> {VAL_LOSS[-1]:.2f} over "
              f"{STEPS[-1]} steps")
        if finding.diverged:
            print(f"  DIVERGED: MOS dropped {finding.mos_drop:.3f} across steps "
                  f"{finding.window[0]}..{finding.window[1]} while loss kept "
                  f"improving (by {finding.loss_drop:.2f})")
        else:
            print("  no loss-quality divergence")
        print(f"  checkpoint ranking by MOS: {ranking}")
        print(f"  pick step {ranking[0]}, not the final (lowest-loss) step "
              f"{STEPS[-1]}\n")


if __name__ == "__main__":
    main()
