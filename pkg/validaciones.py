"""
Funciones de validación para parámetros numéricos y curvas.
Todas devuelven True/False; quien llama decide qué excepción lanzar.
"""
import math

import numpy as np


def validar_finito(valor) -> bool:
    """Valida que el valor (escalar o arreglo) sea numérico y finito."""
    try:
        arr = np.asarray(valor, dtype=float)
    except (TypeError, ValueError):
        return False
    return bool(arr.size > 0 and np.all(np.isfinite(arr)))


def validar_positivo(valor) -> bool:
    """Valida que el valor sea un número finito estrictamente positivo."""
    try:
        v = float(valor)
        return math.isfinite(v) and v > 0
    except (TypeError, ValueError):
        return False


def validar_no_negativo(valor) -> bool:
    try:
        v = float(valor)
        return math.isfinite(v) and v >= 0
    except (TypeError, ValueError):
        return False


def validar_entero_minimo(valor, minimo: int) -> bool:
    """Valida que el valor sea un entero (no booleano) mayor o igual que `minimo`."""
    if isinstance(valor, bool):
        return False
    try:
        return int(valor) == valor and int(valor) >= minimo
    except (TypeError, ValueError):
        return False


def validar_paso_relativo(valor) -> bool:
    """El paso relativo de diferencias finitas debe estar en (0, 1)."""
    try:
        v = float(valor)
        return 0 < v < 1
    except (TypeError, ValueError):
        return False


def validar_estrictamente_creciente(valores) -> bool:
    """Valida que la secuencia sea estrictamente creciente (columna x de un CSV)."""
    arr = np.asarray(valores, dtype=float)
    return bool(arr.size >= 2 and np.all(np.diff(arr) > 0))


def validar_estrictamente_decreciente(valores) -> bool:
    # Lista de pasos de tiempo para un estudio de convergencia
    arr = np.asarray(valores, dtype=float)
    return bool(arr.size >= 1 and np.all(arr > 0) and np.all(np.diff(arr) < 0))
