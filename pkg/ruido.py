"""
Incrementos brownianos reproducibles.

Cada camino tiene su propio generador Philox con clave (semilla, camino); el
incremento del paso k es la k-ésima extracción del flujo. Los incrementos gruesos
se obtienen sumando los finos, de modo que todas las resoluciones comparten el
mismo browniano.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

import numpy as np

import validaciones
from errores import ErrorParametro

logger = logging.getLogger(__name__)

T = TypeVar("T")


def generador(semilla: int, camino: int) -> np.random.Generator:
    if not (validaciones.validar_entero_minimo(semilla, 0) and validaciones.validar_entero_minimo(camino, 0)):
        raise ErrorParametro("semilla y camino deben ser enteros >= 0")
    return np.random.Generator(np.random.Philox(key=np.array([semilla, camino], dtype=np.uint64)))


def incrementos(semilla: int, camino: int, n_pasos: int, dt: float, d: int = 1) -> np.ndarray:
    """Matriz (n_pasos, d) de incrementos N(0, dt)."""
    if not validaciones.validar_positivo(dt):
        raise ErrorParametro(f"dt debe ser > 0, recibido {dt}")
    return generador(semilla, camino).standard_normal((n_pasos, d)) * np.sqrt(dt)


def agregar(finos: np.ndarray, factor: int) -> np.ndarray:
    """Suma bloques consecutivos de `factor` incrementos finos."""
    finos = np.asarray(finos, dtype=float)
    if finos.ndim == 1:
        finos = finos[:, None]
    if factor < 1 or finos.shape[0] % factor:
        raise ErrorParametro(f"{finos.shape[0]} incrementos no se agrupan de a {factor}")
    return finos.reshape(-1, factor, finos.shape[1]).sum(axis=1)


def factor_refinamiento(dt_grueso: float, dt_fino: float) -> int:
    m = dt_grueso / dt_fino
    if abs(m - round(m)) > 1e-9 * m or round(m) < 1:
        raise ErrorParametro(f"dt={dt_grueso} no es múltiplo entero de {dt_fino}")
    return int(round(m))


def mapear_caminos(funcion: Callable[[int], T], n_caminos: int, trabajadores: int = 1) -> List[T]:
    """Aplica `funcion` a cada índice de camino conservando el orden."""
    if not validaciones.validar_entero_minimo(n_caminos, 1):
        raise ErrorParametro("n_caminos debe ser >= 1")
    if trabajadores <= 1:
        return [funcion(i) for i in range(n_caminos)]
    with ThreadPoolExecutor(max_workers=trabajadores) as pool:
        return list(pool.map(funcion, range(n_caminos)))
