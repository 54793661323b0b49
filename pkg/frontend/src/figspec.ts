import { z } from "zod";

const panelSchema = z.object({
  dataset: z.string(),
  value: z.string(),
  x: z.string().default("beta_re"),
  y: z.string().default("beta_im"),
  label: z.string().default(""),
  colormap: z.enum(["diverging", "sequential"]).default("diverging"),
  scale: z.enum(["linear", "log"]).default("linear"),
});

const figureSchema = z.object({
  out: z.string(),
  title: z.string().optional(),
  columns: z.number().int().positive().default(2),
  panels: z.array(panelSchema).min(1),
});

export type PanelSpec = z.infer<typeof panelSchema>;
export type FigureSpec = z.infer<typeof figureSchema>;

export function parseFigureSpec(text: string): FigureSpec {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch (err) {
    throw new Error(`spec is not valid JSON: ${(err as Error).message}`);
  }
  const result = figureSchema.safeParse(raw);
  if (!result.success) {
    const issues = result.error.issues
      .map((i) => `${i.path.join(".")}: ${i.message}`)
      .join("; ");
    throw new Error(`invalid figure spec: ${issues}`);
  }
  return result.data;
}
