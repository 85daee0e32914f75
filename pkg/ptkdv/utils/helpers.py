# ptkdv/utils/helpers.py

import asyncio
import math
import os
import re
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, List, Optional, Tuple, Union

from loguru import logger

from ..core.errors import UsageError

_SQRT_HALF = 1.0 / math.sqrt(2.0)

# exact tokens for the wavenumbers used by the figure presets
_SYMBOLIC_COMPLEX = {
    '1/sqrt2': complex(_SQRT_HALF, 0.0),
    '-1/sqrt2': complex(-_SQRT_HALF, 0.0),
    'i/sqrt2': complex(0.0, _SQRT_HALF),
    '-i/sqrt2': complex(0.0, -_SQRT_HALF),
}


def parse_complex(text: Union[str, int, float, complex]) -> complex:
    """Parse `a+bi`, `bi`, `a` or one of the `1/sqrt2`, `i/sqrt2` tokens."""
    if isinstance(text, (int, float, complex)):
        return complex(text)

    token = text.strip().lower().replace(' ', '')
    if token in _SYMBOLIC_COMPLEX:
        return _SYMBOLIC_COMPLEX[token]
    if not token:
        raise UsageError("empty complex literal")

    if token.endswith('i'):
        token = token[:-1] + 'j'
    # bare unit: `i`, `-i`, `2-i`
    token = re.sub(r'(^|[+-])j$', r'\g<1>1j', token)
    try:
        return complex(token)
    except ValueError:
        raise UsageError(f"invalid complex literal: {text!r}")


def parse_range(text: str) -> Tuple[float, float]:
    """Parse `lo:hi` into a float pair."""
    match = re.fullmatch(r'\s*([^:]+):([^:]+)\s*', text)
    if not match:
        raise UsageError(f"invalid range {text!r}, expected lo:hi")
    try:
        lo, hi = float(match.group(1)), float(match.group(2))
    except ValueError:
        raise UsageError(f"invalid range {text!r}, expected lo:hi")
    if not hi > lo:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


def format_real(value: float) -> str:
    """Shortest decimal form that round-trips the double exactly."""
    return repr(float(value))


def format_complex(value: complex) -> str:
    """17 significant digits for both components."""
    value = complex(value)
    sign = '-' if value.imag < 0 or (value.imag == 0 and math.copysign(1.0, value.imag) < 0) else '+'
    return f"{value.real:.17g}{sign}{abs(value.imag):.17g}i"


def atomic_write_text(path: Path, text: str) -> Path:
    """Write a file through a temporary sibling and an atomic rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    # temp file in the same directory so the rename stays on one filesystem
    fd, temp_path = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}_', suffix='.tmp')

    try:
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
        os.replace(temp_path, path)
    except Exception:
        try:
            os.unlink(temp_path)
        except OSError:
            pass
        raise

    return path


def sanitize_filename(filename: str) -> str:
    """Sanitize a generated filename."""
    filename = re.sub(r'[<>:"/\\|?*\s]', '_', filename)
    filename = re.sub(r'_+', '_', filename)
    filename = filename.strip('_. ')
    return filename or 'unnamed'


def format_duration(seconds: float) -> str:
    """Format duration in human-readable form."""
    if seconds < 60:
        return f"{seconds:.1f}s"
    elif seconds < 3600:
        return f"{seconds / 60:.1f}m"
    return f"{seconds / 3600:.1f}h"


def chunk_list(items: List[Any], chunk_size: int) -> List[List[Any]]:
    """Split a list into chunks of specified size."""
    return [items[i:i + chunk_size] for i in range(0, len(items), chunk_size)]


async def async_chunk_processor(
        items: List[Any],
        processor_func: Callable[[Any], Any],
        chunk_size: int = 1,
        max_concurrent: Optional[int] = None
) -> List[Any]:
    """Run a blocking function over items in a thread pool, results in input order."""
    from ..core.config import settings

    max_concurrent = max_concurrent or settings.max_workers or 1
    chunks = chunk_list(items, chunk_size)
    loop = asyncio.get_running_loop()
    semaphore = asyncio.Semaphore(max_concurrent)

    with ThreadPoolExecutor(max_workers=max_concurrent) as executor:

        async def process_chunk(chunk):
            async with semaphore:
                results = []
                for item in chunk:
                    results.append(await loop.run_in_executor(executor, processor_func, item))
                return results

        chunk_results = await asyncio.gather(*[process_chunk(chunk) for chunk in chunks])

    results = []
    for chunk_result in chunk_results:
        results.extend(chunk_result)

    logger.debug(f"Processed {len(results)} items in {len(chunks)} chunks")
    return results


def run_chunked(items: List[Any], processor_func: Callable[[Any], Any], **kwargs) -> List[Any]:
    """Synchronous entry point for async_chunk_processor."""
    return asyncio.run(async_chunk_processor(items, processor_func, **kwargs))
