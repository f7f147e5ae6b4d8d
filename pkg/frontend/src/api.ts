// Thin fetch wrappers over the bank endpoints.  Bodies carry only ids,
// amounts, and dynamic values; the helper secret never appears here.

export interface ApiClient {
  base: string;
  fetchImpl?: typeof fetch;
}

export interface SessionInfo {
  session_id: string;
  salt: string;
  z: number;
  length: number;
}

export interface CredentialInfo {
  account_id: string;
  random_number: string;
  temp_password: string;
  allowance_cents: number;
  expires: number;
}

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function post(client: ApiClient, path: string, body: unknown): Promise<any> {
  const doFetch = client.fetchImpl ?? fetch;
  const response = await doFetch(`${client.base}${path}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  const text = await response.text();
  if (!response.ok) {
    throw new ApiError(response.status, `${path} failed: ${response.status} ${text}`);
  }
  return text ? JSON.parse(text) : {};
}

export function registerAccount(
  client: ApiClient,
  id: string,
  balanceCents: number,
): Promise<any> {
  return post(client, "/accounts", { id, balance_cents: balanceCents });
}

export function openSession(client: ApiClient, accountId: string): Promise<SessionInfo> {
  return post(client, "/sessions", { account_id: accountId });
}

export async function submitLogin(
  client: ApiClient,
  sessionId: string,
  password: string,
): Promise<boolean> {
  const data = await post(client, `/sessions/${sessionId}/login`, { password });
  return data.result === "succeeded";
}

export function setLimit(
  client: ApiClient,
  accountId: string,
  sessionId: string,
  password: string,
  newLimitCents: number,
): Promise<any> {
  return post(client, `/accounts/${accountId}/limit`, {
    session_id: sessionId,
    password,
    new_limit_cents: newLimitCents,
  });
}

export function mintCredential(
  client: ApiClient,
  accountId: string,
  sessionId: string,
  password: string,
): Promise<CredentialInfo> {
  return post(client, `/accounts/${accountId}/credentials`, {
    session_id: sessionId,
    password,
  });
}

export function pay(
  client: ApiClient,
  accountId: string,
  randomNumber: string,
  password: string,
  merchant: string,
  amountCents: number,
): Promise<any> {
  return post(client, "/payments", {
    account_id: accountId,
    random_number: randomNumber,
    password,
    merchant,
    amount_cents: amountCents,
  });
}
