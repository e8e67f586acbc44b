"""Built-in benchmark scenarios: meniscus relaxation between wetted walls
and the contact-angle sweep of a semicylinder drop on a flat wall.

Both are generated as plain config dictionaries and go through the normal
validation path, so a serialized benchmark is an ordinary scenario file.
`resolution` scales the cell size: 1.0 is the reference 0.125 um lattice,
0.5 doubles the spacing (half resolution, same physical domain).
"""

from __future__ import annotations

import math

from .config import ScenarioConfig, config_from_dict

REFERENCE_SPACING = 0.125  # um

CONTACT_ANGLE_SIGMA2 = {
    30: 13.9282,
    45: 5.8284,
    60: 3.0,
    90: 1.0,
    120: 0.3333,
}


def sigma2_for_angle(angle_deg: float, sigma1: float = 1.0) -> float:
    """sigma1/sigma2 = (1 - cos phi)/(1 + cos phi) solved for sigma2."""
    c = math.cos(math.radians(angle_deg))
    return sigma1 * (1.0 + c) / (1.0 - c)


def meniscus_dict(resolution: float = 1.0, end_time: float = 30.0,
                  cadence: float = 0.25, dt: float | str = 0.001) -> dict:
    """Two liquids in a 10 um slot between walls, flat start, designed 30 deg.

    Domain 12 x 0.5/res x 16 um; cavity x in (1, 11), z in (1, 16); liquid 1
    fills the cavity up to z = 8; 100 kPa fixed pressure on the open top.
    """
    a = REFERENCE_SPACING / resolution
    nx, ny, nz = round(12 / a), 4, round(16 / a)
    return {
        "grid": {
            "dims": [nx, ny, nz],
            "spacing_um": a,
            "bc": {
                "x": ["solid", "solid"],
                "y": "periodic",
                "z": ["solid", {"kind": "fixed_pressure", "pressure_kpa": 100.0}],
            },
        },
        "phases": {
            "rho_pg_per_um3": [1.0, 1.0],
            "eta_cp": [0.1, 0.1],
            "sigma_proper_pg_per_us2": [3.349, 46.651],
        },
        "shapes": {
            "liquid1": {"kind": "box",
                        "lo_um": [1.0, -1.0, 1.0],
                        "hi_um": [11.0, ny * a + 1.0, 8.0]},
            "wall": {"kind": "complement",
                     "part": {"kind": "box",
                              "lo_um": [1.0, -1.0, 1.0],
                              "hi_um": [11.0, ny * a + 1.0, 16.0 + 1.0]}},
        },
        "numerics": {
            "dt_us": dt,
            "end_time_us": end_time,
            "eps12_um": a,
            "eps0_um": a,
            "c_wall": 4.0,
            "formulation": "wall-symmetric",
            "pcg_tol": 1e-8,
        },
        "output": {"cadence_us": cadence, "directory": "out", "formats": ["csv"]},
    }


def contact_angle_dict(angle_deg: int = 60, resolution: float = 1.0,
                       end_time: float = 50.0, cadence: float = 0.5,
                       dt: float | str = 0.001) -> dict:
    """Semicylinder drop (radius 5 um) on a 3 um wall layer, sigma1 = 1.

    Domain 30 x 0.5/res x 14 um; fixed 100 kPa on the open top; periodic y.
    """
    if angle_deg in CONTACT_ANGLE_SIGMA2:
        sigma2 = CONTACT_ANGLE_SIGMA2[angle_deg]
    else:
        sigma2 = sigma2_for_angle(angle_deg)
    a = REFERENCE_SPACING / resolution
    nx, ny, nz = round(30 / a), 4, round(14 / a)
    return {
        "grid": {
            "dims": [nx, ny, nz],
            "spacing_um": a,
            "bc": {
                "x": "symmetry",
                "y": "periodic",
                "z": ["solid", {"kind": "fixed_pressure", "pressure_kpa": 100.0}],
            },
        },
        "phases": {
            "rho_pg_per_um3": [1.0, 1.0],
            "eta_cp": [0.1, 0.1],
            "sigma_proper_pg_per_us2": [1.0, float(sigma2)],
        },
        "shapes": {
            "liquid1": {"kind": "cylinder", "axis": 1,
                        "center_um": [15.0, 3.0], "radius_um": 5.0},
            "wall": {"kind": "halfspace", "normal": [0.0, 0.0, 1.0],
                     "point_um": [0.0, 0.0, 3.0]},
        },
        "numerics": {
            "dt_us": dt,
            "end_time_us": end_time,
            "eps12_um": a,
            "eps0_um": a,
            "c_wall": 4.0,
            "formulation": "wall-symmetric",
            "pcg_tol": 1e-8,
        },
        "output": {"cadence_us": cadence, "directory": "out", "formats": ["csv"]},
    }


def meniscus_config(**kwargs) -> ScenarioConfig:
    return config_from_dict(meniscus_dict(**kwargs), source="<bench meniscus>")


def contact_angle_config(angle_deg: int = 60, **kwargs) -> ScenarioConfig:
    return config_from_dict(contact_angle_dict(angle_deg, **kwargs),
                            source=f"<bench contact-angle {angle_deg}>")
