import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { SchemaError } from "./csv";
import { FIGURE_KINDS, FigureKind } from "./schemas";
import { renderFigure } from "./render";

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .command("render", "render one experiment CSV into a figure")
    .option("kind", {
      choices: FIGURE_KINDS as unknown as string[],
      demandOption: true,
      describe: "which CSV schema / figure layout to use",
    })
    .option("in", { type: "string", demandOption: true, describe: "input CSV path" })
    .option("out", { type: "string", demandOption: true, describe: "output .svg or .png path" })
    .option("title", { type: "string" })
    .option("log-y", { type: "boolean", default: undefined })
    .option("width", { type: "number", default: 960 })
    .option("height", { type: "number", default: 540 })
    .demandCommand(1)
    .strict()
    .parse();

  try {
    await renderFigure({
      kind: args.kind as FigureKind,
      input: args.in as string,
      output: args.out as string,
      title: args.title,
      logY: args["log-y"] as boolean | undefined,
      width: args.width,
      height: args.height,
    });
    return 0;
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`schema mismatch: ${err.message}`);
      return 2;
    }
    console.error(String(err));
    return 1;
  }
}

if (require.main === module) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
