"""
Generate the reference synthetic traffic dataset (20000 rows, 4 features,
burst + periodic anomalies) with its spec sidecar.
"""

import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from datapipe import reference_spec
from mamnet import write_generated


REFERENCE_PATH = os.getenv("REFERENCE_PATH", "data/reference.csv")
REFERENCE_SEED = int(os.getenv("REFERENCE_SEED", "42"))


def main():
    print("🚀 Generating reference dataset...\n")

    spec = reference_spec(REFERENCE_SEED)
    print(f"🔹 {spec.length} rows x {spec.features} features, seed {spec.seed}")
    for event in spec.events:
        print(f"🔹 {event.kind}: rate {event.rate}, magnitude {event.magnitude}, duration {event.duration}")

    csv_path, sidecar = write_generated(spec, REFERENCE_PATH)

    print(f"\n✅ Dataset: {csv_path}")
    print(f"✅ Spec sidecar: {sidecar}")


if __name__ == "__main__":
    main()
