// Dynamic-password derivation, mirrored digit-for-digit from the service.
// The secret (fixed password digits, multiplier a, alphabet size Z) lives
// only in page state; only derived dynamic passwords ever leave the page.

const DIGIT_CHARS = "0123456789abcdef";

export class FieldError extends Error {
  readonly field: string;

  constructor(field: string, message: string) {
    super(message);
    this.field = field;
  }
}

export interface HelperSecret {
  password: string; // fixed password digit string
  a: number; // multiplier, coprime to z
  z: number; // alphabet size
}

function gcd(a: number, b: number): number {
  while (b !== 0) {
    [a, b] = [b, a % b];
  }
  return a;
}

export function parseDigits(text: string, z: number, field: string): number[] {
  if (z < 2 || z > 16) {
    throw new FieldError(field, `alphabet size must be in [2, 16], got ${z}`);
  }
  const digits: number[] = [];
  for (const ch of text.toLowerCase()) {
    const value = DIGIT_CHARS.indexOf(ch);
    if (value < 0 || value >= z) {
      throw new FieldError(field, `invalid digit '${ch}' for alphabet size ${z}`);
    }
    digits.push(value);
  }
  return digits;
}

export function renderDigits(digits: number[], z: number): string {
  return digits.map((d) => {
    if (d < 0 || d >= z) {
      throw new FieldError("digits", `digit ${d} out of range for alphabet ${z}`);
    }
    return DIGIT_CHARS[d];
  }).join("");
}

// k1 = (a*x1 + y1 + x2 + c) mod z, then k_i = (a*k_{i-1} + y_i + x_i + c) mod z
export function deriveEq2(
  x: number[],
  y: number[],
  a: number,
  z: number,
  c: number,
): number[] {
  if (x.length !== y.length) {
    throw new FieldError("salt", "salt length must match the password length");
  }
  if (x.length < 2) {
    throw new FieldError("password", "password needs at least 2 digits");
  }
  if (gcd(a, z) !== 1) {
    throw new FieldError("a", `multiplier ${a} shares a factor with ${z}`);
  }
  if (!Number.isInteger(c) || c < 0 || c >= z) {
    throw new FieldError("c", `session constant must be in [0, ${z})`);
  }
  const k: number[] = [(a * x[0] + y[0] + x[1] + c) % z];
  for (let i = 1; i < x.length; i++) {
    k.push((a * k[i - 1] + y[i] + x[i] + c) % z);
  }
  return k;
}

export function computeDynamicPassword(
  secret: HelperSecret,
  saltText: string,
  c: number,
): string {
  const x = parseDigits(secret.password, secret.z, "password");
  const y = parseDigits(saltText, secret.z, "salt");
  return renderDigits(deriveEq2(x, y, secret.a, secret.z, c), secret.z);
}

// the user must pick c fresh for every login; the dice button uses this
export function randomConstant(z: number): number {
  return Math.floor(Math.random() * z);
}
