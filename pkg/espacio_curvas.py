"""
Representación discreta del espacio de curvas forward H_w.

Implementa:
- Malla de madurez uniforme con pad extra para poder desplazar curvas
- Curvas forward inmutables y su aritmética
- Derivada (operador A = d/dx), integral acumulada, semigrupo de desplazamientos
- Norma ponderada, producto interno y seminormas diagnósticas
- Funcionales lineales (tasas puntuales, rendimientos de referencia, combinaciones)
- Diagnóstico de rango de la condición de interpolación (A3)
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

import validaciones
from errores import ErrorCondicionamiento, ErrorDominio, ErrorPadAgotado, ErrorParametro

logger = logging.getLogger(__name__)

# Malla por defecto: 10 años + 5 de pad, paso 0.025
X_MAX_DEFECTO = 10.0
PAD_DEFECTO = 5.0
N_PUNTOS_DEFECTO = 601

# Tolerancia relativa para reconocer desplazamientos que caen exactamente en nodos
_TOL_NODO = 1e-9


@dataclass(frozen=True)
class MallaMadurez:
    """Malla uniforme de madurez x en [0, x_max + pad].

    Atributos:
        x_max (float) - madurez máxima reportada
        pad (float) - cola extra para que S_t h siga en la malla hasta t = pad
        n_puntos (int)
    """
    x_max: float = X_MAX_DEFECTO
    pad: float = PAD_DEFECTO
    n_puntos: int = N_PUNTOS_DEFECTO

    def __post_init__(self):
        if not validaciones.validar_positivo(self.x_max):
            raise ErrorParametro(f"x_max debe ser positivo, recibido {self.x_max}")
        if not validaciones.validar_no_negativo(self.pad):
            raise ErrorParametro(f"pad debe ser >= 0, recibido {self.pad}")
        if not validaciones.validar_entero_minimo(self.n_puntos, 3):
            raise ErrorParametro(f"n_puntos debe ser un entero >= 3, recibido {self.n_puntos}")

    @property
    def longitud(self) -> float:
        return self.x_max + self.pad

    @property
    def paso(self) -> float:
        return self.longitud / (self.n_puntos - 1)

    @property
    def nodos(self) -> np.ndarray:
        return np.linspace(0.0, self.longitud, self.n_puntos)

    @property
    def indice_x_max(self) -> int:
        """Último índice con x <= x_max."""
        return int(math.floor(self.x_max / self.paso + _TOL_NODO))

    def a_dict(self) -> dict:
        return {"x_max": self.x_max, "pad": self.pad, "n_points": self.n_puntos}

    @classmethod
    def desde_dict(cls, datos: dict) -> "MallaMadurez":
        try:
            return cls(float(datos["x_max"]), float(datos["pad"]), int(datos["n_points"]))
        except KeyError as e:
            raise ErrorParametro(f"Falta el campo {e} en la malla")

    @classmethod
    def con_paso(cls, x_max: float, pad: float, paso: float) -> "MallaMadurez":
        """Malla cuyo paso es exactamente `paso` (x_max + pad debe ser múltiplo)."""
        n = (x_max + pad) / paso
        if abs(n - round(n)) > 1e-6 * max(1.0, n):
            raise ErrorParametro(f"x_max + pad = {x_max + pad} no es múltiplo del paso {paso}")
        return cls(x_max, pad, int(round(n)) + 1)


class CurvaForward:
    """Curva forward h(x) muestreada en una malla. Inmutable.

    `pad_consumido` acumula los desplazamientos aplicados: los nodos con
    x > longitud - pad_consumido ya no contienen información real.
    """

    __slots__ = ("malla", "valores", "pad_consumido")

    def __init__(self, malla: MallaMadurez, valores, pad_consumido: float = 0.0):
        arr = np.array(valores, dtype=float)
        if arr.ndim != 1 or arr.size != malla.n_puntos:
            raise ErrorParametro(
                f"La curva tiene {arr.size} valores, la malla {malla.n_puntos} nodos")
        if not validaciones.validar_finito(arr):
            raise ErrorParametro("La curva contiene valores no finitos")
        arr.flags.writeable = False
        object.__setattr__(self, "malla", malla)
        object.__setattr__(self, "valores", arr)
        object.__setattr__(self, "pad_consumido", float(pad_consumido))

    def __setattr__(self, nombre, valor):
        raise AttributeError("CurvaForward es inmutable")

    # ------------------ Constructores ------------------
    @classmethod
    def desde_funcion(cls, malla: MallaMadurez, funcion: Callable[[np.ndarray], np.ndarray]) -> "CurvaForward":
        valores = np.broadcast_to(np.asarray(funcion(malla.nodos), dtype=float), (malla.n_puntos,))
        return cls(malla, valores)

    @classmethod
    def constante(cls, malla: MallaMadurez, valor: float) -> "CurvaForward":
        return cls(malla, np.full(malla.n_puntos, float(valor)))

    @classmethod
    def cero(cls, malla: MallaMadurez) -> "CurvaForward":
        return cls.constante(malla, 0.0)

    # ------------------ Propiedades ------------------
    @property
    def nodos(self) -> np.ndarray:
        return self.malla.nodos

    @property
    def tasa_corta(self) -> float:
        """R = h(0)."""
        return float(self.valores[0])

    @property
    def pad_restante(self) -> float:
        return self.malla.pad - self.pad_consumido

    def reportable(self) -> np.ndarray:
        """Valores en [0, x_max]."""
        return self.valores[: self.malla.indice_x_max + 1]

    def con_valores(self, valores) -> "CurvaForward":
        return CurvaForward(self.malla, valores, self.pad_consumido)

    # ------------------ Aritmética ------------------
    def _combinar(self, otra, operacion):
        if isinstance(otra, CurvaForward):
            if otra.malla != self.malla:
                raise ErrorParametro("Las curvas viven en mallas distintas")
            return CurvaForward(self.malla, operacion(self.valores, otra.valores),
                                max(self.pad_consumido, otra.pad_consumido))
        return CurvaForward(self.malla, operacion(self.valores, float(otra)), self.pad_consumido)

    def __add__(self, otra):
        return self._combinar(otra, np.add)

    __radd__ = __add__

    def __sub__(self, otra):
        return self._combinar(otra, np.subtract)

    def __rsub__(self, otra):
        return self._combinar(otra, lambda a, b: b - a)

    def __mul__(self, otra):
        return self._combinar(otra, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, otra):
        return self._combinar(otra, np.divide)

    def __neg__(self):
        return CurvaForward(self.malla, -self.valores, self.pad_consumido)

    def sup(self) -> float:
        return float(np.max(np.abs(self.valores)))

    def __repr__(self):
        return (f"CurvaForward(n={self.malla.n_puntos}, h(0)={self.tasa_corta:.6g}, "
                f"pad_consumido={self.pad_consumido:.4g})")


@dataclass(frozen=True)
class FuncionPeso:
    """Peso w de la norma de H_w: exponencial e^{alpha x} (alpha > 0) o polinomial (1+x)^alpha (alpha > 3).

    La integrabilidad de w^{-1/3} no se puede comprobar en una malla finita; solo se
    guardan el tipo y alpha.
    """
    tipo: str = "exponencial"
    alpha: float = 0.1

    def __post_init__(self):
        if self.tipo == "exponencial":
            if not validaciones.validar_positivo(self.alpha):
                raise ErrorParametro("El peso exponencial requiere alpha > 0")
        elif self.tipo == "polinomial":
            if not (validaciones.validar_finito(self.alpha) and self.alpha > 3):
                raise ErrorParametro("El peso polinomial requiere alpha > 3")
        else:
            raise ErrorParametro(f"Tipo de peso desconocido: {self.tipo}")

    def evaluar(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.tipo == "exponencial":
            return np.exp(self.alpha * x)
        return (1.0 + x) ** self.alpha


PESO_DEFECTO = FuncionPeso()


# ------------------ Operadores sobre curvas ------------------
def deriv(h: CurvaForward, orden: int = 2) -> CurvaForward:
    """Operador A = d/dx: diferencias centrales en el interior, unilaterales en los extremos.

    orden=2 es el operador por defecto. orden=4 usa esténciles de cinco puntos y lo
    emplean los corchetes de Lie, donde el error de los extremos domina el residuo.
    """
    if orden == 2 or h.malla.n_puntos < 5:
        return h.con_valores(np.gradient(h.valores, h.malla.paso, edge_order=2))
    if orden != 4:
        raise ErrorParametro(f"Orden de derivada no soportado: {orden}")
    f = h.valores
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:])
    d[0] = -25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]
    d[1] = -3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]
    d[-1] = 25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]
    d[-2] = 3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]
    return h.con_valores(d / (12.0 * h.malla.paso))


def integral(h: CurvaForward) -> CurvaForward:
    """Integral acumulada x -> int_0^x h(y) dy por trapecios; vale 0 en x = 0."""
    return h.con_valores(cumulative_trapezoid(h.valores, dx=h.malla.paso, initial=0.0))


def desplazar(h: CurvaForward, t: float) -> CurvaForward:
    """Semigrupo de desplazamientos (S_t h)(x) = h(x + t).

    Si t es múltiplo del paso de la malla el desplazamiento es un corrimiento de
    índices exacto; si no, se interpola linealmente. Los nodos que quedan fuera
    se rellenan con el último valor y se marcan como pad consumido.
    """
    if not validaciones.validar_no_negativo(t):
        raise ErrorParametro(f"El desplazamiento debe ser >= 0, recibido {t}")
    if t > h.pad_restante + _TOL_NODO * h.malla.longitud:
        raise ErrorPadAgotado(
            f"Desplazamiento {t:.6g} supera el pad restante {h.pad_restante:.6g}")
    if t == 0:
        return h
    paso = h.malla.paso
    k = t / paso
    k_entero = int(round(k))
    if abs(k - k_entero) <= _TOL_NODO * max(1.0, k):
        valores = np.empty_like(h.valores)
        n = h.valores.size
        valores[: n - k_entero] = h.valores[k_entero:]
        valores[n - k_entero:] = h.valores[-1]
    else:
        valores = np.interp(h.nodos + t, h.nodos, h.valores)
    return CurvaForward(h.malla, valores, h.pad_consumido + t)


def evaluar_en(h: CurvaForward, x) -> np.ndarray:
    """Interpolación lineal de h en los puntos x (dentro de la malla)."""
    return np.interp(x, h.nodos, h.valores)


def _pesos_trapecio(malla: MallaMadurez) -> np.ndarray:
    q = np.full(malla.n_puntos, malla.paso)
    q[0] = q[-1] = 0.5 * malla.paso
    return q


def norma_w(h: CurvaForward, w: FuncionPeso = PESO_DEFECTO) -> float:
    """||h||_w = sqrt(|h(0)|^2 + int |h'|^2 w dx), integral por trapecios sobre toda la malla."""
    dh = deriv(h).valores
    return math.sqrt(h.valores[0] ** 2 + trapezoid(dh ** 2 * w.evaluar(h.nodos), dx=h.malla.paso))


def coordenadas_w(h: CurvaForward, w: FuncionPeso = PESO_DEFECTO) -> np.ndarray:
    """Vector T(h) tal que T(g) . T(h) es el producto interno discreto de H_w.

    Sirve para proyectar con mínimos cuadrados ordinarios.
    """
    dh = deriv(h).valores
    escala = np.sqrt(_pesos_trapecio(h.malla) * w.evaluar(h.nodos))
    return np.concatenate(([h.valores[0]], escala * dh))


def producto_interno_w(g: CurvaForward, h: CurvaForward, w: FuncionPeso = PESO_DEFECTO) -> float:
    return float(np.dot(coordenadas_w(g, w), coordenadas_w(h, w)))


def seminorma(h: CurvaForward, n: int, w: FuncionPeso = PESO_DEFECTO) -> float:
    """p_n(h) = sum_{i<=n} ||A^i h||_w, solo como diagnóstico (la derivada numérica pierde precisión con i)."""
    total = 0.0
    actual = h
    for _ in range(n + 1):
        total += norma_w(actual, w)
        actual = deriv(actual)
    return total


# ------------------ Funcionales lineales ------------------
@dataclass(frozen=True)
class TerminoFuncional:
    """Un sumando peso * (h^{(orden)}(nodo)) si tipo == 'punto', o peso * int_0^nodo h^{(orden)} si 'integral'."""
    tipo: str
    nodo: float
    peso: float
    orden: int = 0


@dataclass(frozen=True)
class FuncionalLineal:
    """Funcional lineal continuo sobre curvas.

    tipo:
        'puntual'      - h(x_i)             (benchmark forward rate)
        'rendimiento'  - (1/x_i) int_0^x_i h (benchmark yield), x_i > 0
        'combinacion'  - sum_k w_k h(x_k)
    """
    tipo: str
    nodos: Tuple[float, ...]
    pesos: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.tipo not in ("puntual", "rendimiento", "combinacion"):
            raise ErrorParametro(f"Tipo de funcional desconocido: {self.tipo}")
        if not self.nodos or not validaciones.validar_finito(self.nodos):
            raise ErrorParametro("El funcional necesita nodos finitos")
        if any(x < 0 for x in self.nodos):
            raise ErrorParametro("Los nodos del funcional deben ser >= 0")
        if self.tipo == "rendimiento" and self.nodos[0] <= 0:
            raise ErrorParametro("El rendimiento de referencia requiere x_i > 0")
        if self.tipo == "combinacion" and len(self.pesos) != len(self.nodos):
            raise ErrorParametro("La combinación necesita un peso por nodo")

    @classmethod
    def puntual(cls, x: float) -> "FuncionalLineal":
        return cls("puntual", (float(x),))

    @classmethod
    def rendimiento(cls, x: float) -> "FuncionalLineal":
        return cls("rendimiento", (float(x),))

    @classmethod
    def combinacion(cls, pesos: Sequence[float], nodos: Sequence[float]) -> "FuncionalLineal":
        return cls("combinacion", tuple(float(x) for x in nodos), tuple(float(p) for p in pesos))

    def terminos(self, orden_derivada: int = 0) -> List[TerminoFuncional]:
        """Términos de l o A^k. Para rendimientos usa int_0^x h^{(k)} = h^{(k-1)}(x) - h^{(k-1)}(0)."""
        k = orden_derivada
        if self.tipo == "puntual":
            return [TerminoFuncional("punto", self.nodos[0], 1.0, k)]
        if self.tipo == "rendimiento":
            x = self.nodos[0]
            if k == 0:
                return [TerminoFuncional("integral", x, 1.0 / x, 0)]
            return [TerminoFuncional("punto", x, 1.0 / x, k - 1),
                    TerminoFuncional("punto", 0.0, -1.0 / x, k - 1)]
        return [TerminoFuncional("punto", x, p, k) for x, p in zip(self.nodos, self.pesos)]

    def a_dict(self) -> dict:
        datos = {"kind": self.tipo, "nodes": list(self.nodos)}
        if self.tipo == "combinacion":
            datos["weights"] = list(self.pesos)
        return datos

    @classmethod
    def desde_dict(cls, datos: dict) -> "FuncionalLineal":
        tipo = datos.get("kind")
        if tipo == "combinacion":
            return cls.combinacion(datos["weights"], datos["nodes"])
        return cls(tipo, tuple(float(x) for x in datos["nodes"]))


def _validar_nodos(funcional: FuncionalLineal, malla: MallaMadurez):
    for x in funcional.nodos:
        if x < 0 or x > malla.x_max + _TOL_NODO * malla.longitud:
            raise ErrorDominio(f"Nodo {x} fuera de [0, {malla.x_max}]")


def aplicar_funcional(funcional: FuncionalLineal, h: CurvaForward) -> float:
    """Evalúa l(h): interpolación lineal para puntos, integral por trapecios para rendimientos."""
    _validar_nodos(funcional, h.malla)
    total = 0.0
    integral_h = None
    derivadas = {0: h}
    for termino in funcional.terminos():
        if termino.tipo == "integral":
            if integral_h is None:
                integral_h = integral(h)
            total += termino.peso * float(evaluar_en(integral_h, termino.nodo))
        else:
            if termino.orden not in derivadas:
                derivadas[termino.orden] = deriv(derivadas[termino.orden - 1])
            total += termino.peso * float(evaluar_en(derivadas[termino.orden], termino.nodo))
    return total


# ------------------ Diagnóstico (A3) ------------------
@dataclass(frozen=True)
class SondaExponencial:
    """Curva de prueba e^{-gamma x} con derivadas e integrales analíticas."""
    gamma: float

    def valor(self, x: float, orden: int) -> float:
        return (-self.gamma) ** orden * math.exp(-self.gamma * x)

    def integral(self, x: float, orden: int) -> float:
        if orden == 0:
            return (1.0 - math.exp(-self.gamma * x)) / self.gamma
        return self.valor(x, orden - 1) - self.valor(0.0, orden - 1)


@dataclass
class InformeRango:
    rango: int
    objetivo: int
    completo: bool
    valores_singulares: List[float] = field(default_factory=list)
    umbral: float = 0.0

    def a_dict(self) -> dict:
        return {"rank": self.rango, "target": self.objetivo, "full": self.completo,
                "singular_values": self.valores_singulares, "threshold": self.umbral}


def sondas_por_defecto(n: int) -> List[SondaExponencial]:
    return [SondaExponencial(0.25 * (m + 1)) for m in range(n)]


def rango_a3(funcionales: Sequence[FuncionalLineal], q: int, dim_sonda: Optional[int] = None,
             malla: Optional[MallaMadurez] = None,
             sondas: Optional[Sequence[SondaExponencial]] = None) -> InformeRango:
    """Rango numérico de (l, l o A, ..., l o A^q) sobre una base de sondas exponenciales.

    La matriz tiene filas l_j o A^k y columnas las sondas e_m; el umbral del SVD es
    max_dim * eps * sigma_max.
    """
    p = len(funcionales)
    if p == 0:
        raise ErrorParametro("Se necesita al menos un funcional")
    if not validaciones.validar_entero_minimo(q, 0):
        raise ErrorParametro(f"q debe ser un entero >= 0, recibido {q}")
    objetivo = p * (q + 1)
    if dim_sonda is None:
        dim_sonda = objetivo + 2
    if dim_sonda < objetivo:
        raise ErrorParametro(f"dim_sonda={dim_sonda} menor que p(q+1)={objetivo}")
    if malla is not None:
        for funcional in funcionales:
            _validar_nodos(funcional, malla)
    if sondas is None:
        sondas = sondas_por_defecto(dim_sonda)
    gammas = [s.gamma for s in sondas]
    if len(sondas) != dim_sonda or len(set(gammas)) != len(gammas) or min(gammas) <= 0:
        raise ErrorCondicionamiento("La base de sondas es degenerada (tasas repetidas o no positivas)")

    filas = []
    for k in range(q + 1):
        for funcional in funcionales:
            terminos = funcional.terminos(k)
            fila = []
            for sonda in sondas:
                v = 0.0
                for t in terminos:
                    if t.tipo == "punto":
                        v += t.peso * sonda.valor(t.nodo, t.orden)
                    else:
                        v += t.peso * sonda.integral(t.nodo, t.orden)
                fila.append(v)
            filas.append(fila)
    matriz = np.array(filas)
    s = np.linalg.svd(matriz, compute_uv=False)
    umbral = max(matriz.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rango = int(np.sum(s > umbral))
    if rango < objetivo:
        logger.info("Rango (A3) %d < %d: el mapa no es abierto", rango, objetivo)
    return InformeRango(rango, objetivo, rango == objetivo, [float(v) for v in s], float(umbral))
