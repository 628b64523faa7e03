#!/usr/bin/env python3
# Copyright 2026 The Nusa Toolkit Authors.
# SPDX-License-Identifier: Apache-2.0
"""Sentence-level chrF++ reference values.

Counts every character n-gram (n <= 6, whitespace removed) and word n-gram
(n <= 2, trailing or leading punctuation split off) by enumeration, then
averages precision and recall over the orders both sides can form.
When sacrebleu is importable the values are cross-checked against it.

Usage: chrf_oracle.py [OUT_JSON]
"""

import json
import string
import sys
from collections import Counter

PAIRS = [
    ("Aku lunga menyang pasar.", "Aku lunga menyang pasar."),
    ("Abdi angkat ka pasar.", "Abdi indit ka pasar."),
    ("I go to the market.", "Saya pergi ke pasar."),
    ("", "Tiang lunga ka peken."),
    ("Ulun tulak ka pasar.", "Ulun tulak ka pasar hari ini."),
    ("Sengko entar ka pasar", "Engkok entar ka pasar."),
    ("Iyak lao ri pasa'e.", "Iyya' lao ri pasa'e."),
    ("Aku haguet ka pasar.", "Aku haguet akan pasar."),
    ("Kucing itu tidur di atas meja, bukan di kursi!", "Kucing tidur di kursi, bukan di atas meja."),
    ("xyz", "abc"),
    ("a", "a b"),
    ("Hari ini hujan deras sekali; jalanan banjir.", "Hari ini hujan sangat deras, jalan banjir."),
    ("Rumah   gadang  punyo atok", "Rumah gadang punyo atok nan bagonjong"),
    ("Ëmbun pagi di daun talas", "Embun pagi di daun talas"),
]

PUNCT = set(string.punctuation)
CHAR_ORDER, WORD_ORDER, BETA = 6, 2, 2.0


def split_punct(token):
    if len(token) > 1:
        if token[-1] in PUNCT:
            return [token[:-1], token[-1]]
        if token[0] in PUNCT:
            return [token[0], token[1:]]
    return [token]


def words_of(text):
    out = []
    for tok in text.split():
        out.extend(split_punct(tok))
    return out


def char_grams(text, n):
    chars = "".join(text.split())
    return Counter(chars[i:i + n] for i in range(len(chars) - n + 1))


def word_grams(words, n):
    return Counter(tuple(words[i:i + n]) for i in range(len(words) - n + 1))


def chrf_pp(hyp, ref):
    hw, rw = words_of(hyp), words_of(ref)
    stats = []
    for n in range(1, CHAR_ORDER + 1):
        stats.append((char_grams(hyp, n), char_grams(ref, n)))
    for n in range(1, WORD_ORDER + 1):
        stats.append((word_grams(hw, n), word_grams(rw, n)))
    precisions, recalls = [], []
    for h, r in stats:
        total_h, total_r = sum(h.values()), sum(r.values())
        if total_r == 0:
            total_h = 0
        if total_h == 0 or total_r == 0:
            continue
        match = sum(min(c, r[g]) for g, c in h.items())
        precisions.append(match / total_h)
        recalls.append(match / total_r)
    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p + r == 0:
        return 0.0
    b2 = BETA * BETA
    return 100.0 * (1 + b2) * p * r / (b2 * p + r)


def main(out_path=None):
    rows = [{"hyp": h, "ref": r, "chrf_pp": chrf_pp(h, r)} for h, r in PAIRS]
    try:
        from sacrebleu.metrics import CHRF
        metric = CHRF(word_order=2)
        for row in rows:
            ref_score = metric.sentence_score(row["hyp"], [row["ref"]]).score
            if abs(ref_score - row["chrf_pp"]) > 1e-6:
                raise SystemExit(f"mismatch with sacrebleu on {row}: {ref_score}")
    except ImportError:
        pass
    text = json.dumps(rows, ensure_ascii=False, indent=1) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
