"""
Lectura y escritura de curvas (CSV) y reportes (JSON).

Formato de curva: cabecera exacta `x,rate` y una fila por nodo, con x
estrictamente creciente desde 0. Los valores se escriben con 17 cifras
significativas para que leer y volver a escribir reproduzca el archivo.
"""
import json
import logging
import math
import os
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.interpolate import CubicSpline

from errores import ErrorFormato, ErrorPadAgotado
from espacio_curvas import PAD_DEFECTO, CurvaForward, MallaMadurez

logger = logging.getLogger(__name__)

CABECERA_CURVA = ["x", "rate"]
FORMATO_FLOAT = "%.17g"


# ------------------ Curvas ------------------
def _leer_celdas(ruta: str) -> pd.DataFrame:
    try:
        return pd.read_csv(ruta, dtype=str, keep_default_na=False, skipinitialspace=False)
    except FileNotFoundError:
        raise ErrorFormato(f"No existe el archivo {ruta}")
    except pd.errors.EmptyDataError:
        raise ErrorFormato(f"{ruta}: archivo vacío", 1)
    except pd.errors.ParserError as e:
        raise ErrorFormato(f"{ruta}: filas mal formadas: {e}")


def _a_float(celda: str, ruta: str, linea: int) -> float:
    try:
        valor = float(celda)
    except ValueError:
        raise ErrorFormato(f"{ruta}: valor no numérico {celda!r}", linea)
    if not math.isfinite(valor):
        raise ErrorFormato(f"{ruta}: valor no finito {celda!r}", linea)
    return valor


def leer_tabla_curva(ruta: str):
    """Devuelve (x, valores) validados; los errores llevan el número de línea del archivo."""
    datos = _leer_celdas(ruta)
    if list(datos.columns) != CABECERA_CURVA:
        raise ErrorFormato(
            f"{ruta}: la cabecera debe ser exactamente 'x,rate', se leyó {','.join(map(str, datos.columns))!r}", 1)
    if datos.empty:
        raise ErrorFormato(f"{ruta}: no hay filas de datos", 2)
    x, valores = [], []
    # Cabecera en la línea 1: la fila i del DataFrame está en la línea i + 2
    for i, (cx, cr) in enumerate(datos.itertuples(index=False, name=None)):
        linea = i + 2
        x.append(_a_float(cx, ruta, linea))
        valores.append(_a_float(cr, ruta, linea))
        if i > 0 and x[-1] <= x[-2]:
            raise ErrorFormato(f"{ruta}: x no es estrictamente creciente ({x[-2]} -> {x[-1]})", linea)
    if x[0] != 0:
        raise ErrorFormato(f"{ruta}: la curva debe empezar en x = 0, empieza en {x[0]}", 2)
    return np.array(x), np.array(valores)


def leer_curva(ruta: str, malla: Optional[MallaMadurez] = None, pad: float = PAD_DEFECTO) -> CurvaForward:
    """Lee una curva.

    Sin `malla` los nodos deben ser uniformes y la malla se infiere con el pad
    pedido. Con `malla`, si los nodos no coinciden se interpola con splines
    cúbicos (el archivo debe cubrir toda la malla).
    """
    x, valores = leer_tabla_curva(ruta)
    if malla is None:
        if x.size < 3:
            raise ErrorFormato(f"{ruta}: se necesitan al menos 3 nodos")
        pasos = np.diff(x)
        if not np.allclose(pasos, pasos[0], rtol=1e-9, atol=0.0):
            raise ErrorFormato(f"{ruta}: nodos no uniformes; indique la malla para interpolar")
        longitud = float(x[-1])
        pad_efectivo = pad if longitud > pad else 0.0
        malla = MallaMadurez(longitud - pad_efectivo, pad_efectivo, x.size)
        return CurvaForward(malla, valores)
    if x.size == malla.n_puntos and np.allclose(x, malla.nodos, rtol=0.0, atol=1e-9 * malla.longitud):
        return CurvaForward(malla, valores)
    if x[-1] < malla.longitud - 1e-9 * malla.longitud:
        raise ErrorPadAgotado(f"{ruta}: la curva llega a x = {x[-1]}, la malla a {malla.longitud}")
    logger.info("%s: interpolando %d nodos sobre la malla de %d", ruta, x.size, malla.n_puntos)
    return CurvaForward(malla, CubicSpline(x, valores)(malla.nodos))


def escribir_tabla(ruta: str, columnas: Dict[str, Sequence[float]]):
    """CSV con las columnas dadas, en orden, y 17 cifras significativas."""
    _crear_directorio(ruta)
    pd.DataFrame({k: np.asarray(v, dtype=float) for k, v in columnas.items()}).to_csv(
        ruta, index=False, float_format=FORMATO_FLOAT, lineterminator="\n")


def escribir_curva(h: CurvaForward, ruta: str):
    escribir_tabla(ruta, {"x": h.nodos, "rate": h.valores})


def leer_directorio_curvas(directorio: str, malla: Optional[MallaMadurez] = None) -> List[CurvaForward]:
    """Todas las curvas *.csv del directorio, en orden alfabético."""
    if not os.path.isdir(directorio):
        raise ErrorFormato(f"{directorio} no es un directorio")
    nombres = sorted(n for n in os.listdir(directorio) if n.endswith(".csv"))
    if not nombres:
        raise ErrorFormato(f"{directorio} no contiene curvas .csv")
    return [leer_curva(os.path.join(directorio, n), malla) for n in nombres]


# ------------------ JSON ------------------
def _crear_directorio(ruta: str):
    carpeta = os.path.dirname(os.path.abspath(ruta))
    os.makedirs(carpeta, exist_ok=True)


def _serializable(valor):
    if isinstance(valor, dict):
        return {k: _serializable(v) for k, v in valor.items()}
    if isinstance(valor, (list, tuple)):
        return [_serializable(v) for v in valor]
    if isinstance(valor, np.ndarray):
        return _serializable(valor.tolist())
    if isinstance(valor, (np.floating, float)):
        v = float(valor)
        return v if math.isfinite(v) else None
    if isinstance(valor, (np.integer,)):
        return int(valor)
    if isinstance(valor, np.bool_):
        return bool(valor)
    return valor


def a_json(datos: dict) -> str:
    """JSON con claves ordenadas: mismas entradas dan el mismo texto."""
    return json.dumps(_serializable(datos), sort_keys=True, indent=2, ensure_ascii=False)


def escribir_json(datos: dict, ruta: str):
    _crear_directorio(ruta)
    with open(ruta, "w", encoding="utf-8") as f:
        f.write(a_json(datos))
        f.write("\n")


def leer_json(ruta: str) -> dict:
    try:
        with open(ruta, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ErrorFormato(f"No existe el archivo {ruta}")
    except json.JSONDecodeError as e:
        raise ErrorFormato(f"{ruta}: JSON inválido: {e.msg}", e.lineno)
