from dataclasses import replace
from pathlib import Path
from typing import Any

from django.core.management.base import CommandParser

from apps.cli.services.command import RulCommand
from apps.synth_data.services.generator import SynthConfig, generate, write_fixture


class Command(RulCommand):
    help = "Generate a seeded synthetic SCADA fleet in the ingest CSV formats."

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument("--out", type=Path, required=True, help="Fixture output directory.")
        parser.add_argument("--seed", type=int, help="Overrides the config seed.")
        parser.add_argument("--failures", dest="n_failures", type=int, help="Number of failures.")
        self.add_config_argument(parser)

    def handle(self, *args: object, **options: Any) -> None:
        config_path = options.get("config")
        config = SynthConfig.from_file(config_path) if config_path else SynthConfig()
        changes = {
            key: options[key]
            for key in ("seed", "n_failures")
            if options.get(key) is not None
        }
        if changes:
            config = replace(config, **changes)

        fleet = generate(config)
        written = write_fixture(fleet, options["out"])
        self.stdout.write(
            self.style.SUCCESS(
                f"Wrote {len(fleet.datasets)} synthetic failures "
                f"(seed={config.seed}, M={config.parameter_count}) to {options['out']}."
            )
        )
        for name, path in written.items():
            self.stdout.write(f"- {name}: {path}")
