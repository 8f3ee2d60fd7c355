"""Regenerate the stored `provlock reproduce` outputs after an intended change."""

from pathlib import Path

from provlock.fixtures import FIXTURE_IDS, render_fixture

OUT = Path(__file__).resolve().parents[1] / "src" / "provlock" / "data" / "expected"


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name in FIXTURE_IDS:
        (OUT / f"{name}.txt").write_text(render_fixture(name), encoding="utf-8")
        print(f"wrote {name}.txt")


if __name__ == "__main__":
    main()
