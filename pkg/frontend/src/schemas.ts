import { z } from "zod";

import { SchemaError, Table, checkHeader, toRecords } from "./csv";

const num = z.coerce.number().refine((v) => Number.isFinite(v), "not a finite number");
const int = z.coerce.number().int();
// empty cells appear when a pipeline stage was skipped (e.g. diverged training)
const numOrBlank = z
  .string()
  .transform((s) => (s === "" ? null : Number(s)))
  .refine((v) => v === null || Number.isFinite(v), "not a number or blank");

export const convergenceRow = z.object({
  n: int,
  seed: int,
  sw_p: num,
  bound_unbounded: num,
  bound_bounded: num,
  bound_iid: num,
  ess: num,
  acceptance_rate: num,
});

export const compareRow = z.object({
  theta: num,
  seed: int,
  method: z.string().min(1),
  sw_p: numOrBlank,
  tv: numOrBlank,
  note: z.string(),
});

export const lossTraceRow = z.object({
  step: int,
  loss: num,
});

export const scoregapRow = z.object({
  instance: int,
  label: z.string(),
  dim: int,
  variant: z.string().min(1),
  gap: num,
  gap_stderr: num,
  eps_sq: num,
  wasserstein: num,
  bound: num,
  margin: num,
  holds: z.enum(["true", "false"]),
});

export type ConvergenceRow = z.infer<typeof convergenceRow>;
export type CompareRow = z.infer<typeof compareRow>;
export type LossTraceRow = z.infer<typeof lossTraceRow>;
export type ScoregapRow = z.infer<typeof scoregapRow>;

export const FIGURE_KINDS = ["convergence", "compare", "losstrace", "scoregap"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

const ROW_SCHEMAS: Record<FigureKind, z.ZodTypeAny> = {
  convergence: convergenceRow,
  compare: compareRow,
  losstrace: lossTraceRow,
  scoregap: scoregapRow,
};

export function validateTable<T>(kind: FigureKind, table: Table): T[] {
  const schema = ROW_SCHEMAS[kind];
  checkHeader(Object.keys((schema as z.ZodObject<z.ZodRawShape>).shape), table.header);
  if (table.rows.length === 0) {
    throw new SchemaError("empty CSV: header only, no data rows");
  }
  const out: T[] = [];
  for (const [i, record] of toRecords(table).entries()) {
    const parsed = schema.safeParse(record);
    if (!parsed.success) {
      const issue = parsed.error.issues[0];
      throw new SchemaError(
        `row ${i + 2}, column ${issue.path.join(".")}: ${issue.message}`,
      );
    }
    out.push(parsed.data as T);
  }
  return out;
}
