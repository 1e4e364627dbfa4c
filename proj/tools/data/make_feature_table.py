"""Regenerates data/features/phoneme_features.tsv from articulatory descriptions."""
import pathlib

FEATURES = ["syllabic", "consonantal", "sonorant", "continuant", "delayedRelease", "approximant", "tap", "trill",
            "nasal", "lateral", "labial", "round", "labiodental", "coronal", "anterior", "distributed", "strident",
            "dorsal", "high", "low", "front", "back", "tense", "periodicGlottalSource", "spreadGlottis",
            "constrictedGlottis", "long"]

# symbol: (place, manner, voiced, extras)
CONSONANTS = {
    "p": ("bilabial", "stop", 0), "b": ("bilabial", "stop", 1), "t": ("alveolar", "stop", 0),
    "d": ("alveolar", "stop", 1), "ʈ": ("retroflex", "stop", 0), "ɖ": ("retroflex", "stop", 1),
    "c": ("palatal", "stop", 0), "ɟ": ("palatal", "stop", 1), "k": ("velar", "stop", 0), "g": ("velar", "stop", 1),
    "q": ("uvular", "stop", 0), "ʔ": ("glottal", "stop", 0),
    "pʰ": ("bilabial", "stop", 0, "asp"), "tʰ": ("alveolar", "stop", 0, "asp"), "kʰ": ("velar", "stop", 0, "asp"),
    "bʰ": ("bilabial", "stop", 1, "asp"), "dʰ": ("alveolar", "stop", 1, "asp"), "gʰ": ("velar", "stop", 1, "asp"),
    "kʷ": ("velar", "stop", 0, "lab"), "gʷ": ("velar", "stop", 1, "lab"),
    "ɸ": ("bilabial", "fricative", 0), "β": ("bilabial", "fricative", 1), "f": ("labiodental", "fricative", 0),
    "v": ("labiodental", "fricative", 1), "θ": ("dental", "fricative", 0), "ð": ("dental", "fricative", 1),
    "s": ("alveolar", "sibilant", 0), "z": ("alveolar", "sibilant", 1), "ʃ": ("postalveolar", "sibilant", 0),
    "ʒ": ("postalveolar", "sibilant", 1), "ç": ("palatal", "fricative", 0), "ʝ": ("palatal", "fricative", 1),
    "x": ("velar", "fricative", 0), "ɣ": ("velar", "fricative", 1), "χ": ("uvular", "fricative", 0),
    "ʁ": ("uvular", "fricative", 1), "ħ": ("pharyngeal", "fricative", 0), "ʕ": ("pharyngeal", "fricative", 1),
    "h": ("glottal", "fricative", 0),
    "t͡s": ("alveolar", "affricate", 0), "d͡z": ("alveolar", "affricate", 1), "t͡ʃ": ("postalveolar", "affricate", 0),
    "d͡ʒ": ("postalveolar", "affricate", 1),
    "m": ("bilabial", "nasal", 1), "n": ("alveolar", "nasal", 1), "ɳ": ("retroflex", "nasal", 1),
    "ɲ": ("palatal", "nasal", 1), "ŋ": ("velar", "nasal", 1),
    "l": ("alveolar", "lateral", 1), "ʎ": ("palatal", "lateral", 1), "ɬ": ("alveolar", "lateralfricative", 0),
    "r": ("alveolar", "trill", 1), "ɾ": ("alveolar", "tap", 1), "ɹ": ("alveolar", "approximant", 1),
    "j": ("palatal", "approximant", 1), "w": ("labiovelar", "approximant", 1), "ʍ": ("labiovelar", "approximant", 0),
}

# symbol: (height, backness, rounded)
VOWELS = {
    "i": ("high", "front", 0), "y": ("high", "front", 1), "ɨ": ("high", "central", 0), "ʉ": ("high", "central", 1),
    "ɯ": ("high", "back", 0), "u": ("high", "back", 1), "ɪ": ("nearhigh", "front", 0), "ʊ": ("nearhigh", "back", 1),
    "e": ("midhigh", "front", 0), "ø": ("midhigh", "front", 1), "ɵ": ("midhigh", "central", 1),
    "ɤ": ("midhigh", "back", 0), "o": ("midhigh", "back", 1), "ə": ("mid", "central", 0),
    "ɛ": ("midlow", "front", 0), "œ": ("midlow", "front", 1), "ʌ": ("midlow", "back", 0), "ɔ": ("midlow", "back", 1),
    "æ": ("nearlow", "front", 0), "a": ("low", "central", 0),
    "ɑ": ("low", "back", 0), "ɒ": ("low", "back", 1),
}
LONG = ["a", "e", "i", "o", "u", "y", "æ", "ɑ", "ø"]
NASAL = ["a", "e", "i", "o", "u", "ɛ", "ɔ"]
NASAL_MARK = "̃"


def consonant(place, manner, voiced, extra=None):
    f = dict.fromkeys(FEATURES, "0")
    f["syllabic"] = "-"
    glide = manner == "approximant" and place in ("palatal", "labiovelar")
    f["consonantal"] = "-" if glide or place == "glottal" else "+"
    son = manner in ("nasal", "lateral", "trill", "tap", "approximant")
    f["sonorant"] = "+" if son else "-"
    f["continuant"] = "+" if manner in ("fricative", "sibilant", "lateral", "lateralfricative", "trill", "approximant") else "-"
    f["delayedRelease"] = "+" if manner in ("fricative", "sibilant", "affricate", "lateralfricative") else "-"
    f["approximant"] = "+" if manner in ("lateral", "trill", "tap", "approximant") else "-"
    f["tap"] = "+" if manner == "tap" else "-"
    f["trill"] = "+" if manner == "trill" else "-"
    f["nasal"] = "+" if manner == "nasal" else "-"
    f["lateral"] = "+" if manner in ("lateral", "lateralfricative") else "-"
    labial = place in ("bilabial", "labiodental", "labiovelar") or extra == "lab"
    f["labial"] = "+" if labial else "-"
    if labial:
        f["round"] = "+" if place == "labiovelar" or extra == "lab" else "-"
        f["labiodental"] = "+" if place == "labiodental" else "-"
    coronal = place in ("dental", "alveolar", "postalveolar", "retroflex", "palatal")
    f["coronal"] = "+" if coronal else "-"
    if coronal:
        f["anterior"] = "+" if place in ("dental", "alveolar") else "-"
        f["distributed"] = "+" if place in ("dental", "postalveolar", "palatal") else "-"
        f["strident"] = "+" if manner in ("sibilant", "affricate") else "-"
    dorsal = place in ("palatal", "velar", "uvular", "labiovelar", "pharyngeal")
    f["dorsal"] = "+" if dorsal else "-"
    if dorsal:
        f["high"] = "+" if place in ("palatal", "velar", "labiovelar") else "-"
        f["low"] = "+" if place == "pharyngeal" else "-"
        f["front"] = "+" if place == "palatal" else "-"
        f["back"] = "+" if place in ("velar", "uvular", "labiovelar", "pharyngeal") else "-"
    f["periodicGlottalSource"] = "+" if voiced else "-"
    f["spreadGlottis"] = "+" if extra == "asp" or (place == "glottal" and manner == "fricative") else "-"
    f["constrictedGlottis"] = "+" if place == "glottal" and manner == "stop" else "-"
    f["long"] = "-"
    return f


def vowel(height, backness, rounded, long=False, nasal=False):
    f = dict.fromkeys(FEATURES, "0")
    for k in ("consonantal", "delayedRelease", "tap", "trill", "lateral", "spreadGlottis", "constrictedGlottis"):
        f[k] = "-"
    f["syllabic"] = f["sonorant"] = f["continuant"] = f["approximant"] = "+"
    f["nasal"] = "+" if nasal else "-"
    f["labial"] = "+" if rounded else "-"
    if rounded:
        f["round"] = "+"
        f["labiodental"] = "-"
    f["coronal"] = "-"
    f["dorsal"] = "+"
    f["high"] = "+" if height in ("high", "nearhigh") else "-"
    f["low"] = "+" if height in ("low", "nearlow") else "-"
    f["front"] = "+" if backness == "front" else "-"
    f["back"] = "+" if backness == "back" else "-"
    f["tense"] = "+" if height in ("high", "midhigh") else "-"
    f["periodicGlottalSource"] = "+"
    f["long"] = "+" if long else "-"
    return f


rows = {}
for sym, spec in CONSONANTS.items():
    rows[sym] = consonant(*spec)
for sym, spec in VOWELS.items():
    rows[sym] = vowel(*spec)
for sym in LONG:
    rows[sym + "ː"] = vowel(*VOWELS[sym], long=True)
for sym in NASAL:
    rows[sym + NASAL_MARK] = vowel(*VOWELS[sym], nasal=True)

out = pathlib.Path(__file__).resolve().parents[2] / "data" / "features" / "phoneme_features.tsv"
with open(out, "w", encoding="utf-8") as fh:
    fh.write("segment\t" + "\t".join(FEATURES) + "\n")
    for sym, f in rows.items():
        fh.write(sym + "\t" + "\t".join(f[k] for k in FEATURES) + "\n")
print(f"{len(rows)} segments -> {out}")
