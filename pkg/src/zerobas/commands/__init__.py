"""Command handlers used by the CLI entrypoint."""

from zerobas.commands.ablate import handle_ablate
from zerobas.commands.binauralize import handle_binauralize
from zerobas.commands.dataset_prep import handle_dataset_prep
from zerobas.commands.evaluate import handle_evaluate
from zerobas.commands.serve import handle_serve_vocoder

__all__ = [
    "handle_ablate",
    "handle_binauralize",
    "handle_dataset_prep",
    "handle_evaluate",
    "handle_serve_vocoder",
]
