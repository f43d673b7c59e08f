"""
Estructuras de volatilidad sigma para el modelo HJM.

Contiene:
- Expresion: conjunto pequeño de expresiones cerradas f(x, y1..yp) (constante, exp,
  polinomio, raíz y productos) con derivadas analíticas f_x, f_y, f_yy
- Tres tipos de factor de volatilidad:
    FactorDireccionConstante  sigma(h) = phi(l(h)) * lambda
    FactorFuncional           sigma(h)(x) = phi(x, l1(h), ..., lp(h))
    FactorLocal               sigma(h)(x) = phi(x, h(x))
- EstructuraVolatilidad: la lista de factores, el piso epsilon del dominio U y la
  lectura/escritura en JSON
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from errores import ErrorDominio, ErrorEspecificacion, ErrorParametro
from espacio_curvas import CurvaForward, FuncionalLineal, MallaMadurez, aplicar_funcional, deriv

logger = logging.getLogger(__name__)

TIPOS_FACTOR = ("const", "exp", "poly", "sqrt")


def indice_argumento(variable: str) -> Optional[int]:
    """"y" -> 1, "yk" -> k (k >= 1); None si no es un argumento funcional."""
    if variable == "y":
        return 1
    if variable.startswith("y") and variable[1:].isdigit() and int(variable[1:]) >= 1:
        return int(variable[1:])
    return None


def variable_argumento(k: int) -> str:
    return "y" if k == 1 else f"y{k}"


# ------------------ Expresiones cerradas ------------------
@dataclass(frozen=True)
class FactorExpresion:
    """Un factor de una sola variable.

    const: valor c
    exp:   e^{k v}
    poly:  c0 + c1 v + ... + cn v^n
    sqrt:  sqrt(c0 + c1 v)

    La variable es "x" o un argumento funcional "y", "y2", "y3", ... ("y1" es "y").
    """
    tipo: str
    variable: str = "x"
    parametros: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.tipo not in TIPOS_FACTOR:
            raise ErrorEspecificacion(f"Tipo de factor desconocido: {self.tipo}")
        if self.variable != "x":
            k = indice_argumento(self.variable)
            if k is None:
                raise ErrorEspecificacion(f"Variable desconocida: {self.variable}")
            object.__setattr__(self, "variable", variable_argumento(k))
        esperados = {"const": 1, "exp": 1, "sqrt": 2}
        if self.tipo in esperados and len(self.parametros) != esperados[self.tipo]:
            raise ErrorEspecificacion(
                f"El factor {self.tipo} necesita {esperados[self.tipo]} parámetro(s)")
        if self.tipo == "poly" and not self.parametros:
            raise ErrorEspecificacion("El polinomio necesita al menos un coeficiente")

    def argumento_raiz(self, v):
        return self.parametros[0] + self.parametros[1] * np.asarray(v, dtype=float)

    def evaluar(self, v, orden: int = 0) -> List[np.ndarray]:
        """Valor y derivadas hasta `orden` (<= 2) en la variable del factor."""
        v = np.asarray(v, dtype=float)
        if self.tipo == "const":
            c = np.full_like(v, self.parametros[0])
            return [c, np.zeros_like(v), np.zeros_like(v)][: orden + 1]
        if self.tipo == "exp":
            k = self.parametros[0]
            e = np.exp(k * v)
            return [e, k * e, k * k * e][: orden + 1]
        if self.tipo == "poly":
            c = np.array(self.parametros)
            salida = [P.polyval(v, c)]
            for _ in range(orden):
                c = P.polyder(c) if c.size > 1 else np.array([0.0])
                salida.append(P.polyval(v, c) + np.zeros_like(v))
            return salida
        arg = self.argumento_raiz(v)
        if np.any(arg < 0) or (orden > 0 and np.any(arg <= 0)):
            raise ErrorDominio("Argumento de la raíz fuera del dominio")
        b = self.parametros[1]
        s = np.sqrt(arg)
        if orden == 0:
            return [s]
        return [s, b / (2 * s), -b * b / (4 * s ** 3)][: orden + 1]

    def a_dict(self) -> dict:
        datos = {"kind": self.tipo, "var": self.variable}
        if self.tipo == "const":
            datos["value"] = self.parametros[0]
        elif self.tipo == "exp":
            datos["k"] = self.parametros[0]
        else:
            datos["coeffs"] = list(self.parametros)
        return datos

    @classmethod
    def desde_dict(cls, datos: dict) -> "FactorExpresion":
        try:
            tipo = datos["kind"]
            variable = datos.get("var", "x")
            if tipo == "const":
                return cls("const", variable, (float(datos["value"]),))
            if tipo == "exp":
                return cls("exp", variable, (float(datos["k"]),))
            return cls(tipo, variable, tuple(float(c) for c in datos["coeffs"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ErrorEspecificacion(f"Factor de expresión inválido {datos}: {e}")


def _producto(a: List[np.ndarray], b: List[np.ndarray]) -> List[np.ndarray]:
    # Regla del producto para (f, f', f'')
    salida = [a[0] * b[0]]
    if len(a) > 1:
        salida.append(a[1] * b[0] + a[0] * b[1])
    if len(a) > 2:
        salida.append(a[2] * b[0] + 2 * a[1] * b[1] + a[0] * b[2])
    return salida


@dataclass(frozen=True)
class Expresion:
    """Producto de factores en x y en los argumentos: f(x, y1..yp) = X(x) * Y1(y1) * ... * Yp(yp)."""
    factores: Tuple[FactorExpresion, ...]

    def depende_de(self, variable: str) -> bool:
        return any(f.variable == variable and f.tipo != "const" for f in self.factores)

    @property
    def n_argumentos(self) -> int:
        """Mayor índice de argumento funcional que aparece (al menos 1)."""
        return max([indice_argumento(f.variable) for f in self.factores if f.variable != "x"], default=1)

    def depende_de_argumentos(self) -> bool:
        return any(self.depende_de(variable_argumento(k)) for k in range(1, self.n_argumentos + 1))

    def _parte(self, variable: str, v, orden: int) -> List[np.ndarray]:
        v = np.asarray(v, dtype=float)
        acumulado = [np.ones_like(v), np.zeros_like(v), np.zeros_like(v)][: orden + 1]
        for factor in self.factores:
            if factor.variable == variable:
                acumulado = _producto(acumulado, factor.evaluar(v, orden))
        return acumulado

    def evaluar(self, x, y) -> np.ndarray:
        return self._parte("x", x, 0)[0] * self._parte("y", y, 0)[0]

    def derivadas(self, x, y) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(f, f_x, f_y, f_yy) evaluadas en (x, y)."""
        px = self._parte("x", x, 1)
        py = self._parte("y", y, 2)
        return px[0] * py[0], px[1] * py[0], px[0] * py[1], px[0] * py[2]

    def evaluar_multiple(self, x, ys: Sequence[float]) -> np.ndarray:
        valor = self._parte("x", x, 0)[0]
        for k, y in enumerate(ys, start=1):
            valor = valor * self._parte(variable_argumento(k), y, 0)[0]
        return valor

    def derivadas_multiples(self, x, ys: Sequence[float]):
        """(f, f_x, [d_k f], [[d_k d_m f]]) en (x, y1..yp)."""
        px = self._parte("x", x, 1)
        partes = [self._parte(variable_argumento(k), y, 2) for k, y in enumerate(ys, start=1)]
        p = len(partes)

        def producto(ordenes):
            valor = px[0]
            for parte, o in zip(partes, ordenes):
                valor = valor * parte[o]
            return valor

        f = producto([0] * p)
        f_x = px[1]
        for parte in partes:
            f_x = f_x * parte[0]
        gradiente = [producto([int(j == k) for j in range(p)]) for k in range(p)]
        hessiana = [[producto([int(j == k) + int(j == m) for j in range(p)]) for m in range(p)]
                    for k in range(p)]
        return f, f_x, gradiente, hessiana

    def argumento_raiz_minimo(self, y, variable: str = "y") -> float:
        """Mínimo de los argumentos de las raíces en `variable`; +inf si no hay raíces."""
        minimo = np.inf
        for f in self.factores:
            if f.tipo == "sqrt" and f.variable == variable:
                minimo = min(minimo, float(np.min(f.argumento_raiz(y))))
        return minimo

    def a_dict(self) -> dict:
        return {"factors": [f.a_dict() for f in self.factores]}

    @classmethod
    def desde_dict(cls, datos) -> "Expresion":
        if isinstance(datos, (int, float)):
            return cls((FactorExpresion("const", "x", (float(datos),)),))
        if not isinstance(datos, dict) or not isinstance(datos.get("factors"), list):
            raise ErrorEspecificacion("La expresión debe ser un número o {'factors': [...]}")
        return cls(tuple(FactorExpresion.desde_dict(f) for f in datos["factors"]))

    # Atajos
    @classmethod
    def constante(cls, c: float) -> "Expresion":
        return cls((FactorExpresion("const", "x", (float(c),)),))

    @classmethod
    def exponencial(cls, c: float, k: float, variable: str = "x") -> "Expresion":
        return cls((FactorExpresion("const", variable, (float(c),)),
                    FactorExpresion("exp", variable, (float(k),))))

    def por(self, otra: "Expresion") -> "Expresion":
        return Expresion(self.factores + otra.factores)


# ------------------ Factores de volatilidad ------------------
class FactorVolatilidad:
    """Interfaz común: evaluar sigma_i(h) y su derivada de Fréchet analítica."""

    es_constante = False

    def evaluar(self, h: CurvaForward, piso: Optional[float] = None) -> CurvaForward:
        raise NotImplementedError

    def derivada(self, h: CurvaForward, v: CurvaForward) -> CurvaForward:
        raise NotImplementedError

    def derivada_segunda(self, h: CurvaForward, a: CurvaForward, b: CurvaForward) -> CurvaForward:
        """D^2 sigma_i(h)[a, b]."""
        raise NotImplementedError

    def derivada_x(self, h: CurvaForward, orden: int = 4) -> Optional[CurvaForward]:
        """d/dx sigma_i(h)(x) con la parte analítica disponible; None si no la hay."""
        return None

    def argumento_minimo(self, h: CurvaForward) -> float:
        return np.inf

    def a_dict(self) -> dict:
        raise NotImplementedError


def _curva_direccion(direccion, malla: MallaMadurez) -> CurvaForward:
    if isinstance(direccion, CurvaForward):
        if direccion.malla != malla:
            raise ErrorParametro("La dirección lambda vive en otra malla")
        return direccion
    return CurvaForward(malla, direccion.evaluar(malla.nodos, 0.0))


class FactorDireccionConstante(FactorVolatilidad):
    """sigma(h) = phi(l(h)) * lambda, con lambda fija (curva o expresión en x)."""

    def __init__(self, phi: Expresion, direccion: Union[CurvaForward, Expresion],
                 funcional: Optional[FuncionalLineal] = None):
        if phi.depende_de("x"):
            raise ErrorEspecificacion("phi de dirección constante solo puede depender de l(h)")
        if phi.n_argumentos > 1:
            raise ErrorEspecificacion("phi de dirección constante admite un único argumento y")
        self.phi = phi
        self.direccion = direccion
        self.funcional = funcional or FuncionalLineal.puntual(0.0)
        self.es_constante = not phi.depende_de("y")

    def lambda_en(self, malla: MallaMadurez) -> CurvaForward:
        return _curva_direccion(self.direccion, malla)

    def _y(self, h, piso=None) -> float:
        y = aplicar_funcional(self.funcional, h)
        return y if piso is None else max(y, piso)

    def evaluar(self, h, piso=None):
        escala = float(self.phi.evaluar(0.0, self._y(h, piso)))
        return self.lambda_en(h.malla) * escala

    def derivada(self, h, v):
        if self.es_constante:
            return CurvaForward.cero(h.malla)
        _, _, f_y, _ = self.phi.derivadas(0.0, self._y(h))
        return self.lambda_en(h.malla) * (float(f_y) * aplicar_funcional(self.funcional, v))

    def derivada_segunda(self, h, a, b):
        if self.es_constante:
            return CurvaForward.cero(h.malla)
        _, _, _, f_yy = self.phi.derivadas(0.0, self._y(h))
        escala = float(f_yy) * aplicar_funcional(self.funcional, a) * aplicar_funcional(self.funcional, b)
        return self.lambda_en(h.malla) * escala

    def derivada_x(self, h, orden=4):
        if isinstance(self.direccion, CurvaForward):
            return None
        _, lam_x, _, _ = self.direccion.derivadas(h.nodos, 0.0)
        escala = float(self.phi.evaluar(0.0, self._y(h)))
        return CurvaForward(h.malla, np.broadcast_to(lam_x * escala, h.valores.shape))

    def argumento_minimo(self, h):
        if self.es_constante:
            return np.inf
        return self.phi.argumento_raiz_minimo(self._y(h))

    def a_dict(self):
        if isinstance(self.direccion, CurvaForward):
            direccion = {"values": self.direccion.valores.tolist()}
        else:
            direccion = self.direccion.a_dict()
        return {"kind": "constant_direction", "phi": self.phi.a_dict(),
                "direction": direccion, "functional": self.funcional.a_dict()}


class FactorFuncional(FactorVolatilidad):
    """sigma(h)(x) = phi(x, l1(h), ..., lp(h)); el argumento k de phi es "yk"."""

    def __init__(self, phi: Expresion, funcionales: Union[FuncionalLineal, Sequence[FuncionalLineal]]):
        if isinstance(funcionales, FuncionalLineal):
            funcionales = [funcionales]
        self.funcionales = list(funcionales)
        if not self.funcionales:
            raise ErrorEspecificacion("El factor funcional necesita al menos un funcional")
        if phi.n_argumentos > len(self.funcionales):
            raise ErrorEspecificacion(
                f"phi usa {phi.n_argumentos} argumentos y hay {len(self.funcionales)} funcionales")
        self.phi = phi
        self.es_constante = not phi.depende_de_argumentos()

    def _ys(self, h, piso=None) -> List[float]:
        ys = [aplicar_funcional(l, h) for l in self.funcionales]
        return ys if piso is None else [max(y, piso) for y in ys]

    def _shape(self, h, valores) -> CurvaForward:
        return CurvaForward(h.malla, np.broadcast_to(valores, h.valores.shape))

    def evaluar(self, h, piso=None):
        return self._shape(h, self.phi.evaluar_multiple(h.nodos, self._ys(h, piso)))

    def derivada(self, h, v):
        if self.es_constante:
            return CurvaForward.cero(h.malla)
        _, _, gradiente, _ = self.phi.derivadas_multiples(h.nodos, self._ys(h))
        total = np.zeros_like(h.valores)
        for g, l in zip(gradiente, self.funcionales):
            total = total + g * aplicar_funcional(l, v)
        return self._shape(h, total)

    def derivada_segunda(self, h, a, b):
        if self.es_constante:
            return CurvaForward.cero(h.malla)
        _, _, _, hessiana = self.phi.derivadas_multiples(h.nodos, self._ys(h))
        la = [aplicar_funcional(l, a) for l in self.funcionales]
        lb = [aplicar_funcional(l, b) for l in self.funcionales]
        total = np.zeros_like(h.valores)
        for k, fila in enumerate(hessiana):
            for m, d2 in enumerate(fila):
                total = total + d2 * (la[k] * lb[m])
        return self._shape(h, total)

    def derivada_x(self, h, orden=4):
        _, f_x, _, _ = self.phi.derivadas_multiples(h.nodos, self._ys(h))
        return self._shape(h, f_x)

    def argumento_minimo(self, h):
        return min(self.phi.argumento_raiz_minimo(y, variable_argumento(k))
                   for k, y in enumerate(self._ys(h), start=1))

    def a_dict(self):
        funcionales = [l.a_dict() for l in self.funcionales]
        return {"kind": "functional", "phi": self.phi.a_dict(),
                "functional": funcionales[0] if len(funcionales) == 1 else funcionales}


class FactorLocal(FactorVolatilidad):
    """sigma(h)(x) = phi(x, h(x)). Solo admitido con d = 1."""

    def __init__(self, phi: Expresion):
        if phi.n_argumentos > 1:
            raise ErrorEspecificacion("phi local admite un único argumento y = h(x)")
        self.phi = phi
        self.es_constante = not phi.depende_de("y")

    def evaluar(self, h, piso=None):
        y = h.valores if piso is None else np.maximum(h.valores, piso)
        return h.con_valores(self.phi.evaluar(h.nodos, y))

    def derivada(self, h, v):
        if self.es_constante:
            return CurvaForward.cero(h.malla)
        _, _, f_y, _ = self.phi.derivadas(h.nodos, h.valores)
        return h.con_valores(f_y * v.valores)

    def derivada_segunda(self, h, a, b):
        if self.es_constante:
            return CurvaForward.cero(h.malla)
        _, _, _, f_yy = self.phi.derivadas(h.nodos, h.valores)
        return h.con_valores(f_yy * a.valores * b.valores)

    def derivada_x(self, h, orden=4):
        """d1 phi + phi' h', con h' numérica."""
        _, f_x, f_y, _ = self.phi.derivadas(h.nodos, h.valores)
        valores = f_x + f_y * deriv(h, orden).valores if self.phi.depende_de("y") else f_x
        return h.con_valores(np.broadcast_to(valores, h.valores.shape))

    def argumento_minimo(self, h):
        return self.phi.argumento_raiz_minimo(h.valores)

    def a_dict(self):
        return {"kind": "local", "phi": self.phi.a_dict()}


# ------------------ Estructura completa ------------------
class EstructuraVolatilidad:
    """sigma = (sigma_1, ..., sigma_d) y el piso epsilon del dominio U.

    El dominio U exige que los argumentos de las raíces en y sean > epsilon.
    """

    def __init__(self, factores: Sequence[FactorVolatilidad], epsilon: float = 0.0,
                 malla: Optional[MallaMadurez] = None):
        self.factores = list(factores)
        self.epsilon = float(epsilon)
        if self.epsilon < 0:
            raise ErrorParametro("epsilon debe ser >= 0")
        if any(isinstance(f, FactorLocal) for f in self.factores) and len(self.factores) != 1:
            raise ErrorEspecificacion("La volatilidad local solo se admite con d = 1")
        if malla is not None:
            self.verificar_independencia(malla)

    @property
    def d(self) -> int:
        return len(self.factores)

    @property
    def es_constante(self) -> bool:
        return all(f.es_constante for f in self.factores)

    def verificar_independencia(self, malla: MallaMadurez):
        """(A2): las direcciones lambda deben tener rango numérico igual a su número."""
        direcciones = [f.lambda_en(malla).valores for f in self.factores
                       if isinstance(f, FactorDireccionConstante)]
        if len(direcciones) > 1 and np.linalg.matrix_rank(np.array(direcciones)) < len(direcciones):
            raise ErrorEspecificacion("Las direcciones lambda no son linealmente independientes")

    def en_dominio(self, h: CurvaForward) -> bool:
        try:
            return all(f.argumento_minimo(h) > self.epsilon for f in self.factores)
        except ErrorDominio:
            return False

    def verificar_dominio(self, h: CurvaForward):
        if not self.en_dominio(h):
            raise ErrorDominio(f"La curva {h!r} sale del dominio (epsilon={self.epsilon})")

    def evaluar(self, h: CurvaForward, piso: Optional[float] = None) -> List[CurvaForward]:
        return [f.evaluar(h, piso) for f in self.factores]

    def a_dict(self) -> dict:
        factores = [f.a_dict() for f in self.factores]
        return {"volatility": factores[0] if len(factores) == 1 else factores,
                "epsilon": self.epsilon}

    # ------------------ Constructores habituales ------------------
    @classmethod
    def cero(cls) -> "EstructuraVolatilidad":
        return cls([FactorDireccionConstante(Expresion.constante(0.0), Expresion.constante(1.0))])

    @classmethod
    def vasicek(cls, rho: float, beta: float) -> "EstructuraVolatilidad":
        """sigma = rho e^{-beta x}."""
        return cls([FactorDireccionConstante(Expresion.constante(rho),
                                             Expresion.exponencial(1.0, -beta))])

    @classmethod
    def cir(cls, rho: float, direccion: Union[CurvaForward, Expresion],
            epsilon: float = 0.0) -> "EstructuraVolatilidad":
        """sigma(h) = rho sqrt(h(0)) lambda, dominio U = {h(0) > epsilon}."""
        phi = Expresion((FactorExpresion("const", "y", (float(rho),)),
                         FactorExpresion("sqrt", "y", (0.0, 1.0))))
        return cls([FactorDireccionConstante(phi, direccion)], epsilon)

    @classmethod
    def local(cls, phi: Expresion, epsilon: float = 0.0) -> "EstructuraVolatilidad":
        return cls([FactorLocal(phi)], epsilon)

    @classmethod
    def desde_dict(cls, datos: dict, malla: Optional[MallaMadurez] = None) -> "EstructuraVolatilidad":
        """Lee {"volatility": {...} | [{...}, ...], "epsilon": eps}."""
        if not isinstance(datos, dict) or "volatility" not in datos:
            raise ErrorEspecificacion("Falta la clave 'volatility'")
        bloques = datos["volatility"]
        if isinstance(bloques, dict):
            bloques = [bloques]
        factores = [_factor_desde_dict(b, malla) for b in bloques]
        return cls(factores, float(datos.get("epsilon", 0.0)), malla)


def _factor_desde_dict(bloque: dict, malla: Optional[MallaMadurez]) -> FactorVolatilidad:
    try:
        tipo = bloque["kind"]
        phi = Expresion.desde_dict(bloque["phi"])
        bloque_funcional = bloque.get("functional")
        if isinstance(bloque_funcional, list):
            funcional = [FuncionalLineal.desde_dict(f) for f in bloque_funcional]
        else:
            funcional = FuncionalLineal.desde_dict(bloque_funcional) if bloque_funcional is not None else None
        if tipo == "constant_direction":
            if isinstance(funcional, list):
                raise ErrorEspecificacion("La dirección constante admite un único funcional")
            direccion = bloque["direction"]
            if isinstance(direccion, dict) and "values" in direccion:
                if malla is None:
                    raise ErrorEspecificacion("Una dirección dada por valores necesita la malla")
                direccion = CurvaForward(malla, direccion["values"])
            else:
                direccion = Expresion.desde_dict(direccion)
            return FactorDireccionConstante(phi, direccion, funcional)
        if tipo == "functional":
            if funcional is None:
                raise ErrorEspecificacion("El factor funcional necesita 'functional'")
            return FactorFuncional(phi, funcional)
        if tipo == "local":
            return FactorLocal(phi)
    except (KeyError, TypeError) as e:
        raise ErrorEspecificacion(f"Bloque de volatilidad inválido: {e}")
    except ErrorParametro as e:
        raise ErrorEspecificacion(f"Bloque de volatilidad inválido: {e}")
    raise ErrorEspecificacion(f"Tipo de volatilidad desconocido: {tipo}")
