"""From raw tweets to a distant-labeled corpus.

Hashtags and emoticons stand in for human labels. A tweet carrying markers of
one polarity gets that label and loses the markers; a tweet with both, or
none, is dropped.
"""
from mswe.corpus import MarkerSet, build_vocab, distant_label, extract_windows, prepare, tokenize

raw = [
    "Finally got the tickets!!! #happy @anna http://t.co/xyz",
    "Finally got the tickets!!! #happy @anna http://t.co/xyz",  # exact repeat
    "stuck in traffic again : (",
    "love it but also #angry :)",  # both polarities
    "just a normal tuesday",
    "great :D",  # too short once the marker is gone
]

markers = MarkerSet.default()
for line in raw[:3]:
    toks = tokenize(line)
    print(f"{line!r}\n  tokens: {toks}\n  label:  {distant_label(toks, markers)}")

tweets, stats = prepare(raw, markers, t=3)
print()
print(f"kept {stats.kept} of {stats.lines}: duplicates={stats.duplicates} "
      f"conflicts={stats.conflicts} unlabeled={stats.unlabeled} too_short={stats.too_short}")

# each kept tweet becomes a list of width-3 windows over vocabulary ids
vocab = build_vocab([tw.tokens for tw in tweets], 1)
for tw in tweets:
    ids = vocab.encode(tw.tokens)
    print(tw.label, tw.tokens)
    print("   windows:", extract_windows(ids, 3).tolist())
