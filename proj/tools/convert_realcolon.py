#!/usr/bin/env python3
"""Convert REAL-Colon annotations to the polypcount JSON Lines format.

Best-effort converter for the REAL-Colon release layout:

    <root>/
      001-001_annotations/          one directory per video
        001-001_1.xml               one Pascal-VOC XML per annotated frame
        001-001_2.xml
        ...

Each XML file is expected to carry:

    <annotation>
      <filename>001-001_1.jpg</filename>
      <object>
        <name>lesion_id</name>          <- unique polyp/lesion id
        <bndbox>
          <xmin>..</xmin><ymin>..</ymin><xmax>..</xmax><ymax>..</ymax>
        </bndbox>
      </object>
      ...
    </annotation>

and maps to one JSON line per <object>:

    {"video_id": "001-001", "frame_idx": 1, "entity_id": "<name>",
     "bbox": [xmin, ymin, xmax, ymax]}

Field names above follow the dataset description and should be confirmed
against the downloaded release; adjust FRAME_RE / the tag names below if the
layout differs. Zero-area boxes are skipped with a warning since the loader
rejects them.

Usage:
    convert_realcolon.py <realcolon_root> <out.jsonl> [--manifest out.json]

The optional manifest groups videos into train (first 8 per cohort) and
splits the remaining 7 per cohort between val and test; edit the printed
manifest to match the published split lists before using it for evaluation.
"""

import argparse
import json
import re
import sys
import xml.etree.ElementTree as ET
from collections import defaultdict
from pathlib import Path

FRAME_RE = re.compile(r"^(?P<video>.+)_(?P<frame>\d+)\.xml$")


def convert(root: Path, out_path: Path) -> list[str]:
    videos = set()
    skipped = 0
    rows = 0
    with out_path.open("w") as out:
        for ann_dir in sorted(root.glob("*_annotations")):
            video_id = ann_dir.name.removesuffix("_annotations")
            for xml_path in sorted(ann_dir.glob("*.xml")):
                match = FRAME_RE.match(xml_path.name)
                if not match:
                    print(f"warning: unrecognized file name {xml_path}", file=sys.stderr)
                    continue
                frame_idx = int(match.group("frame"))
                tree = ET.parse(xml_path)
                for obj in tree.findall("object"):
                    entity = obj.findtext("name")
                    box = obj.find("bndbox")
                    if entity is None or box is None:
                        print(f"warning: malformed object in {xml_path}", file=sys.stderr)
                        continue
                    coords = [float(box.findtext(tag)) for tag in ("xmin", "ymin", "xmax", "ymax")]
                    if coords[0] >= coords[2] or coords[1] >= coords[3]:
                        skipped += 1
                        continue
                    record = {
                        "video_id": video_id,
                        "frame_idx": frame_idx,
                        "entity_id": entity.replace("/", "_"),
                        "bbox": coords,
                    }
                    out.write(json.dumps(record) + "\n")
                    rows += 1
                    videos.add(video_id)
    if skipped:
        print(f"warning: skipped {skipped} zero-area boxes", file=sys.stderr)
    print(f"wrote {rows} annotations for {len(videos)} videos to {out_path}")
    return sorted(videos)


def write_manifest(video_ids: list[str], path: Path) -> None:
    # Cohort is the prefix before the dash in REAL-Colon video ids
    # ("001-001" -> cohort "001"). Train = first 8 videos per cohort; the
    # remaining videos alternate val/test. The published split lists should
    # replace this heuristic when available.
    by_cohort: dict[str, list[str]] = defaultdict(list)
    for vid in video_ids:
        by_cohort[vid.split("-")[0]].append(vid)
    manifest = {"train": [], "val": [], "test": []}
    for cohort in sorted(by_cohort):
        vids = sorted(by_cohort[cohort])
        manifest["train"] += vids[:8]
        rest = vids[8:]
        manifest["val"] += rest[0::2]
        manifest["test"] += rest[1::2]
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote heuristic manifest to {path} (edit to match the published splits)")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("root", type=Path, help="REAL-Colon dataset root")
    parser.add_argument("out", type=Path, help="output annotations.jsonl")
    parser.add_argument("--manifest", type=Path, help="also write a split manifest")
    args = parser.parse_args()

    video_ids = convert(args.root, args.out)
    if args.manifest:
        write_manifest(video_ids, args.manifest)


if __name__ == "__main__":
    main()
