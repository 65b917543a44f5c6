"""Shared helpers for building small corpora in tests."""

CORPUS_HEADER = "text_id\tword_index\tsurface\treader_id\trt_ms\tskipped"


def corpus_text(rows):
    """Render (text_id, word_index, surface, reader_id, rt_ms, skipped) rows
    as a corpus TSV string; use '' for absent fields."""
    lines = [CORPUS_HEADER]
    for row in rows:
        lines.append("\t".join(str(f) for f in row))
    return "\n".join(lines) + "\n"


def write_corpus_file(path, rows):
    path.write_text(corpus_text(rows), encoding="utf-8")
    return path
