"""Compare closed-form trench openings with the finite-difference oracle."""

from pathlib import Path

import numpy as np

from trenchsense.commands.base import BaseCommand
from trenchsense.core.config import RunConfig
from trenchsense.core.utils import Timeit
from trenchsense.mechanics.beam import notch_openings
from trenchsense.mechanics.export import (
    write_comparison_csv,
    write_field_csv,
    write_openings_csv,
    write_openings_table,
)
from trenchsense.mechanics.field import (
    MILLINEWTON,
    MM,
    build_deformation_field,
    strip_beam,
)
from trenchsense.mechanics.oracle import compare_with_oracle
from trenchsense.mechanics.types import ContactLoad, MaterialParams
from trenchsense.optics.geometry import SensorGeometry

LOCATIONS = ("A", "B", "C")


class MechanicsCommand(BaseCommand):
    """Compare closed-form trench openings with the finite-difference oracle."""

    name = "mechanics"
    help = __doc__

    def add_arguments(self, parser):
        """Sweep, oracle and field flags."""
        parser.add_argument(
            "--max-force", type=float, help="Largest load of the sweep, in mN"
        )
        parser.add_argument("--steps", type=int, help="Number of loads in the sweep")
        parser.add_argument("--nodes", type=int, help="Oracle grid nodes")
        parser.add_argument(
            "--location",
            action="append",
            choices=LOCATIONS,
            help="Reference notch: A, B or C (the central one); repeatable",
        )
        parser.add_argument("--grid-x", type=float, default=3.0)
        parser.add_argument("--grid-y", type=float, default=3.0)
        parser.add_argument(
            "--field-force",
            type=float,
            help="Load of the 2D field export, in mN; the sweep maximum by default",
        )

    def overrides(self, options):
        """Map flags onto the mechanics section."""
        return {
            "mechanics.sweep_max_force": options.get("max_force"),
            "mechanics.sweep_steps": options.get("steps"),
            "mechanics.oracle_nodes": options.get("nodes"),
        }

    def handle(self, config: RunConfig, out: Path, **options) -> str:
        """Write the sweep tables and the 2D field of one load."""
        geometry = SensorGeometry.from_config(config.geometry)
        material = MaterialParams.from_config(config.material)
        section = config.mechanics
        beam = strip_beam(geometry, material, section.alpha)
        positions = geometry.cross_positions() * MM
        names = options.get("location") or list(LOCATIONS)
        locations = {name: float(positions[LOCATIONS.index(name)]) for name in names}
        forces = np.linspace(0.0, section.sweep_max_force, section.sweep_steps)
        forces = forces * MILLINEWTON

        with Timeit(self.stdout, "Solving the finite-difference oracle"):
            rows = compare_with_oracle(
                beam, material, forces, locations, section.oracle_nodes
            )
        write_comparison_csv(rows, self.output(out, "oracle_comparison.csv"))

        openings = (
            (name, force, notch, opening)
            for name, position in locations.items()
            for force in forces
            for notch, opening in zip(
                beam.notch_positions,
                notch_openings(beam, material.young_modulus_eff, position, force),
                strict=True,
            )
        )
        write_openings_csv(openings, self.output(out, "openings.csv"))

        field_force = options.get("field_force")
        if field_force is None:
            field_force = section.sweep_max_force
        load = ContactLoad.from_force(
            options.get("grid_x", 3.0),
            options.get("grid_y", 3.0),
            field_force,
            section.stiffness_k,
        )
        field = build_deformation_field(
            load, geometry, material, section.alpha, section.field_nodes
        )
        write_field_csv(field, self.output(out, "field.csv"))
        write_openings_table(field, self.output(out, "openings_table.csv"))

        worst = {
            name: max(
                (abs(row.discrepancy) for row in rows if row.location == name),
                default=0.0,
            )
            for name in locations
        }
        report = ", ".join(f"{name} {value:.1%}" for name, value in worst.items())
        return f"Max relative discrepancy over {len(forces)} loads: {report}"
