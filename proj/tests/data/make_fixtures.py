# Copyright 2026 The adsorbxai Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates fixtures.extxyz and fixtures.json (requires ase)."""

import json
import random

import numpy as np
from ase import Atoms
from ase.build import add_adsorbate, bcc110, fcc100, fcc111, hcp0001, molecule

rng = random.Random(7)

SLABS = [
    ("Pt", fcc111, (1, 1, 1), 225, 0.0, 0.0),
    ("Cu", fcc111, (1, 1, 1), 225, 0.0, 0.0),
    ("Ag", fcc100, (1, 0, 0), 225, 0.0, 0.0),
    ("Pd", fcc111, (1, 1, 1), 225, 0.0, 0.0),
    ("Ni", fcc100, (1, 0, 0), 225, 0.0, 0.0),
    ("Fe", bcc110, (1, 1, 0), 229, 0.0, 0.0),
    ("Ru", hcp0001, (0, 0, 1), 194, 0.0, 0.0),
    ("Au", fcc111, (1, 1, 1), 225, 0.0, 0.0),
]

ADSORBATES = [
    ("H", lambda: Atoms("H"), "[H]"),
    ("O", lambda: Atoms("O"), "[O]"),
    ("OH", lambda: Atoms("OH", positions=[(0, 0, 0), (0, 0, 0.97)]), "[OH]"),
    ("CO", lambda: Atoms("CO", positions=[(0, 0, 0), (0, 0, 1.15)]), "[C]=O"),
    ("CH3", lambda: molecule("CH3"), "[CH3]"),
    ("NH3", lambda: molecule("NH3"), "N"),
    ("C2H4", lambda: molecule("C2H4"), "C=C"),
]

SITES = ["ontop", "bridge", "fcc", "hcp", "hollow", "longbridge", "shortbridge"]


def build(metal, maker, ads_name, ads_maker):
    slab = maker(metal, size=(3, 3, 3), vacuum=8.0)
    # ase tags layers 1 (top) .. n; map top layer to surface, the rest to subsurface.
    layer = slab.get_tags()
    tags = np.where(layer == 1, 1, 0)
    ads = ads_maker()
    sites = SITES[:]
    rng.shuffle(sites)
    for site in sites:
        try:
            probe = slab.copy()
            add_adsorbate(probe, ads, 1.6 if len(ads) == 1 else 1.9, site)
            break
        except (KeyError, TypeError):
            continue
    tags = np.concatenate([tags, np.full(len(ads), 2)])
    probe.set_tags(tags)
    return probe


def metadata(metal, hkl, sg, ads_name, index):
    potential = -60.0 - 5.0 * rng.random()
    return {
        "system_id": f"{metal}-{''.join(map(str, hkl))}-{ads_name}-{index}",
        "potential_energy": round(potential, 6),
        "reference_energy": round(potential + rng.uniform(-2.5, 1.0), 6),
        "band_gap": 0.0,
        "formation_energy": round(-rng.uniform(0.0, 0.3), 6),
        "space_group": sg,
        "miller_index": list(hkl),
    }


def write_extxyz(systems, path):
    with open(path, "w") as fh:
        for atoms, meta in systems:
            cell = atoms.get_cell().array
            lattice = " ".join(f"{v:.8f}" for v in cell.reshape(-1))
            pbc = " ".join("T" if p else "F" for p in atoms.get_pbc())
            hkl = " ".join(str(v) for v in meta["miller_index"])
            fh.write(f"{len(atoms)}\n")
            fh.write(
                f'Lattice="{lattice}" Properties=species:S:1:pos:R:3:tag:I:1 pbc="{pbc}" '
                f'system_id={meta["system_id"]} potential_energy={meta["potential_energy"]} '
                f'reference_energy={meta["reference_energy"]} band_gap={meta["band_gap"]} '
                f'formation_energy={meta["formation_energy"]} space_group={meta["space_group"]} '
                f'miller_index="{hkl}"\n'
            )
            for sym, pos, tag in zip(atoms.get_chemical_symbols(), atoms.positions, atoms.get_tags()):
                fh.write(f"{sym} {pos[0]:.8f} {pos[1]:.8f} {pos[2]:.8f} {tag}\n")


def to_json(atoms, meta):
    md = dict(meta)
    sid = md.pop("system_id")
    return {
        "system_id": sid,
        "cell": atoms.get_cell().array.round(8).reshape(-1).tolist(),
        "pbc": [bool(p) for p in atoms.get_pbc()],
        "atoms": [
            {"el": s, "x": round(float(p[0]), 8), "y": round(float(p[1]), 8),
             "z": round(float(p[2]), 8), "tag": int(t)}
            for s, p, t in zip(atoms.get_chemical_symbols(), atoms.positions, atoms.get_tags())
        ],
        "metadata": md,
    }


def main():
    systems = []
    index = 0
    for metal, maker, hkl, sg, _, _ in SLABS:
        for ads_name, ads_maker, _ in ADSORBATES:
            if rng.random() < 0.45 and ads_name not in ("H", "NH3"):
                continue
            atoms = build(metal, maker, ads_name, ads_maker)
            systems.append((atoms, metadata(metal, hkl, sg, ads_name, index)))
            index += 1
    # An oxide-like surface: hydrogen over a catalyst containing oxygen.
    oxide = build("Cu", fcc111, "H", lambda: Atoms("H"))
    symbols = oxide.get_chemical_symbols()
    for k in range(0, 27, 3):
        symbols[k] = "O"
    oxide.set_chemical_symbols(symbols)
    meta = metadata("CuO", (1, 1, 1), 15, "H", index)
    meta["band_gap"] = 1.2
    systems.append((oxide, meta))

    write_extxyz(systems, "fixtures.extxyz")
    with open("fixtures.json", "w") as fh:
        json.dump([to_json(a, m) for a, m in systems[:6]], fh, indent=1)
    print(len(systems), "systems")


if __name__ == "__main__":
    main()
