# The three cleaning regimes side by side.
#
# NotClean keeps every token; LightClean drops stopwords and special
# characters and lowercases; Clean additionally lemmatizes and removes
# proper nouns. Dataset-specific "related articles" contamination is cut
# before tokenization.

from protestlens import (
    CLEAN,
    LIGHT_CLEAN,
    NOT_CLEAN,
    apply_profile,
    strip_related_titles,
    tokenize,
)

raw = "The police arrested 5 protesters in Delhi! Related Articles: Top news; More stories"

# step 1: strip the stray related-article titles
body = strip_related_titles(raw, ["Related Articles"])
print("after title stripping:", repr(body))
print()

# step 2: tokenize once; every profile operates on the same token sequence
seq = tokenize(body)
print(f"{'token':<12} {'pos':<6}")
for tok, pos in zip(seq.tokens, seq.pos):
    print(f"{tok:<12} {pos:<6}")
print()

# step 3: the three regimes
for profile in (NOT_CLEAN, LIGHT_CLEAN, CLEAN):
    cleaned = apply_profile(seq, profile)
    print(f"{profile.name:<11} -> {' '.join(cleaned.tokens)}")

# Cleaning is idempotent: applying a profile twice changes nothing.
once = apply_profile(seq, CLEAN)
assert apply_profile(once, CLEAN) == once
print("\nidempotence holds")
