"""Fixed label taxonomies for facial action units and clustered motion labels.

The action-unit set mirrors the 41 labels of the upstream detector's hybrid
training set, including its idiosyncratic spellings ("Lip funnelerr",
"Lip Corner depressor").  The published label sheet lists AUL4 twice; the
base dimpler unit AU14 is the missing 41st code (its left/right variants
AUL14/AUR14 are present, as are base units for every other lateral pair),
so the duplicate is recorded here as AU14.

The cluster label tables are kept verbatim, oddities included: E1 and E4
share the string "Eye open a lot", and G6 "Eye closed" sits in the gaze
family.  Downstream code treats codes, not strings, as identity.
"""

from __future__ import annotations

FAU_LABELS: dict[str, str] = {
    "AU1": "Inner brow raiser",
    "AU2": "Outer brow raiser",
    "AU4": "Brow lowerer",
    "AU5": "Upper lid raiser",
    "AU6": "Cheek raiser",
    "AU7": "Lid tightener",
    "AU9": "Nose wrinkler",
    "AU10": "Upper lip raiser",
    "AU11": "Nasolabial deepener",
    "AU12": "Lip corner puller",
    "AU13": "Sharp lip puller",
    "AU14": "Dimpler",
    "AU15": "Lip Corner depressor",
    "AU16": "Lower lip depressor",
    "AU17": "Chin raiser",
    "AU18": "Lip pucker",
    "AU19": "Tongue show",
    "AU20": "Lip stretcher",
    "AU22": "Lip funnelerr",
    "AU23": "Lip tightener",
    "AU24": "Lip pressor",
    "AU25": "Lips part",
    "AU26": "Jaw drop",
    "AU27": "Mouth stretch",
    "AU32": "Lip bite",
    "AU38": "Nostril dilator",
    "AU39": "Nostril compressor",
    "AUL1": "Left inner brow raiser",
    "AUR1": "Right inner brow raiser",
    "AUL2": "Left outer brow raiser",
    "AUR2": "Right outer brow raiser",
    "AUL4": "Left brow lowerer",
    "AUR4": "Right brow lowerer",
    "AUL6": "Left cheek raiser",
    "AUR6": "Right cheek raiser",
    "AUL10": "Left upper lip raiser",
    "AUR10": "Right upper lip raiser",
    "AUL12": "Left nasolabial deepener",
    "AUR12": "Right nasolabial deepener",
    "AUL14": "Left dimpler",
    "AUR14": "Right dimpler",
}

GAZE_LABELS: dict[str, str] = {
    "G1": "Gaze towards up a little",
    "G2": "Gaze towards left a little",
    "G3": "Gaze towards ahead",
    "G4": "Gaze towards down a little",
    "G5": "Gaze towards right",
    "G6": "Eye closed",
    "G7": "Gaze towards left",
    "G8": "Gaze towards right a little",
    "G9": "Eye open",
}

POSE_LABELS: dict[str, str] = {
    "H1": "Head turns left a lot",
    "H2": "No head pose",
    "H3": "Head turns left half",
    "H4": "Head turns right half",
    "H5": "Head up a little",
    "H6": "Head down",
    "H7": "Head turns left a little",
    "H8": "Head turns right a lot",
    "H9": "Head turns right a little",
}

BLINK_LABELS: dict[str, str] = {
    "E1": "Eye open a lot",
    "E2": "Eye almost closed",
    "E3": "Eye closed",
    "E4": "Eye open a lot",
    "E5": "Eye open",
}

N_FAUS = 41
CLUSTER_FAMILIES = {"gaze": GAZE_LABELS, "pose": POSE_LABELS, "blink": BLINK_LABELS}

assert len(FAU_LABELS) == N_FAUS
assert len(GAZE_LABELS) == 9 and len(POSE_LABELS) == 9 and len(BLINK_LABELS) == 5


def family_of(code: str) -> str:
    """Which taxonomy family a label code belongs to."""
    if code in FAU_LABELS:
        return "fau"
    for family, table in CLUSTER_FAMILIES.items():
        if code in table:
            return family
    raise KeyError(f"unknown label code {code!r}")


def label_text(code: str) -> str:
    for table in (FAU_LABELS, GAZE_LABELS, POSE_LABELS, BLINK_LABELS):
        if code in table:
            return table[code]
    raise KeyError(f"unknown label code {code!r}")
