// Page wiring: helper panel, login form, and the limit/credential panel.
// The secret is (re-)entered per visit and kept only in this module's
// variables; nothing here persists or transmits it.

import {
  mintCredential,
  openSession,
  pay,
  setLimit,
  submitLogin,
  type ApiClient,
  type SessionInfo,
} from "./api.js";
import {
  FieldError,
  computeDynamicPassword,
  randomConstant,
  type HelperSecret,
} from "./derive.js";

const client: ApiClient = { base: "" };

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function input(id: string): HTMLInputElement {
  return el<HTMLInputElement>(id);
}

function setText(id: string, text: string, cls = ""): void {
  const node = el(id);
  node.textContent = text;
  node.className = cls;
}

function clearFieldErrors(prefix: string): void {
  document.querySelectorAll(`[id^="${prefix}-err-"]`).forEach((n) => (n.textContent = ""));
}

function showFieldError(prefix: string, err: unknown): void {
  if (err instanceof FieldError) {
    const slot = document.getElementById(`${prefix}-err-${err.field}`);
    if (slot) {
      slot.textContent = err.message;
      return;
    }
  }
  setText(`${prefix}-status`, String(err), "error");
}

function currentSecret(): HelperSecret {
  return {
    password: input("helper-password").value.trim(),
    a: Number(input("helper-a").value),
    z: Number(input("helper-z").value) || 10,
  };
}

// --- helper panel ---------------------------------------------------------

function wireHelper(): void {
  el("helper-dice").addEventListener("click", () => {
    const z = Number(input("helper-z").value) || 10;
    input("helper-c").value = String(randomConstant(z));
  });
  el("helper-compute").addEventListener("click", () => {
    clearFieldErrors("helper");
    setText("helper-output", "");
    try {
      const password = computeDynamicPassword(
        currentSecret(),
        input("helper-salt").value.trim(),
        Number(input("helper-c").value),
      );
      setText("helper-output", password, "mono");
    } catch (err) {
      showFieldError("helper", err);
    }
  });
}

// --- login panel ----------------------------------------------------------

let loginSession: SessionInfo | null = null;

function wireLogin(): void {
  el("login-get-salt").addEventListener("click", async () => {
    setText("login-status", "");
    try {
      loginSession = await openSession(client, input("login-account").value.trim());
      setText("login-salt", loginSession.salt, "mono");
      input("helper-salt").value = loginSession.salt;
    } catch (err) {
      loginSession = null;
      setText("login-salt", "");
      setText("login-status", "could not open a session; is the account id right?", "error");
    }
  });
  el("login-submit").addEventListener("click", async () => {
    if (!loginSession) {
      setText("login-status", "get a salt first", "error");
      return;
    }
    try {
      const ok = await submitLogin(client, loginSession.session_id, input("login-password").value.trim());
      setText("login-status", ok ? "login succeeded" : "login failed", ok ? "ok" : "error");
    } catch (err) {
      setText("login-status", "session closed; get a fresh salt", "error");
    } finally {
      loginSession = null; // single use either way
      setText("login-salt", "");
    }
  });
}

// --- limit / credential panel ----------------------------------------------

let panelSession: SessionInfo | null = null;

function wirePanel(): void {
  el("panel-get-salt").addEventListener("click", async () => {
    setText("panel-status", "");
    try {
      panelSession = await openSession(client, input("panel-account").value.trim());
      setText("panel-salt", panelSession.salt, "mono");
      input("helper-salt").value = panelSession.salt;
    } catch (err) {
      panelSession = null;
      setText("panel-salt", "");
      setText("panel-status", "could not open a session", "error");
    }
  });
  el("panel-set-limit").addEventListener("click", async () => {
    if (!panelSession) {
      setText("panel-status", "get a salt first", "error");
      return;
    }
    try {
      const data = await setLimit(
        client,
        input("panel-account").value.trim(),
        panelSession.session_id,
        input("panel-password").value.trim(),
        Number(input("panel-limit").value),
      );
      setText("panel-status", `limit set to ${data.limit_cents} cents`, "ok");
    } catch (err) {
      setText("panel-status", "limit change rejected", "error");
    } finally {
      panelSession = null;
      setText("panel-salt", "");
    }
  });
  el("panel-mint").addEventListener("click", async () => {
    if (!panelSession) {
      setText("panel-status", "get a salt first", "error");
      return;
    }
    try {
      const credential = await mintCredential(
        client,
        input("panel-account").value.trim(),
        panelSession.session_id,
        input("panel-password").value.trim(),
      );
      // shown exactly once: rendered here and never stored
      setText(
        "panel-credential",
        `random number ${credential.random_number} / temp password ${credential.temp_password} ` +
          `(allowance ${credential.allowance_cents} cents) - copy it now, it is not shown again`,
        "mono once",
      );
      setText("panel-status", "credential minted", "ok");
    } catch (err) {
      setText("panel-status", "credential minting rejected", "error");
    } finally {
      panelSession = null;
      setText("panel-salt", "");
    }
  });
  el("panel-dismiss").addEventListener("click", () => setText("panel-credential", ""));
  el("panel-pay").addEventListener("click", async () => {
    try {
      const outcome = await pay(
        client,
        input("panel-account").value.trim(),
        input("pay-random").value.trim(),
        input("pay-password").value.trim(),
        input("pay-merchant").value.trim() || "demo-shop",
        Number(input("pay-amount").value),
      );
      if (outcome.outcome === "approved") {
        setText("pay-status", `approved, ${outcome.remaining_cents} cents left`, "ok");
      } else {
        setText("pay-status", `declined: ${outcome.reason}`, "error");
      }
    } catch (err) {
      setText("pay-status", "payment request failed", "error");
    }
  });
}

wireHelper();
wireLogin();
wirePanel();
