"""Generate an API reference page for each public module of ``sharerisk``."""

import pathlib

import mkdocs_gen_files

PACKAGE = pathlib.Path(__file__).parent.parent.parent / "sharerisk"

MODULE_SYMBOL = '<code class="doc-symbol doc-symbol-nav doc-symbol-module"></code>'


def _is_public(path: pathlib.Path) -> bool:
    parts = path.relative_to(PACKAGE).with_suffix("").parts
    return "tests" not in parts and not (
        parts[-1].startswith("_") and parts[-1] != "__init__"
    )


nav = mkdocs_gen_files.Nav()

for path in filter(_is_public, sorted(PACKAGE.rglob("*.py"))):
    parts = path.relative_to(PACKAGE.parent).with_suffix("").parts
    doc_path = path.relative_to(PACKAGE).with_suffix(".md")

    if parts[-1] == "__init__":
        parts = parts[:-1]
        doc_path = doc_path.with_name("index.md")

    nav[tuple(f"{MODULE_SYMBOL} {part}" for part in parts)] = doc_path.as_posix()

    with mkdocs_gen_files.open(pathlib.Path("reference", doc_path), "w") as file:
        file.write(f"::: {'.'.join(parts)}")

    mkdocs_gen_files.set_edit_path(pathlib.Path("reference", doc_path), ".." / path)

with mkdocs_gen_files.open("reference/SUMMARY.md", "w") as nav_file:
    nav_file.writelines(nav.build_literate_nav())
