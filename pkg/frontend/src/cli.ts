import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { FigureKind, render, SchemaError } from "./figures.js";

const KINDS: FigureKind[] = ["sumrate", "beampattern", "convergence", "tradeoff"];

export async function main(argv: string[]): Promise<number> {
  let exitCode = 0;
  await yargs(argv)
    .command(
      "render",
      "render one figure from an experiment CSV",
      (y) =>
        y
          .option("kind", {
            choices: KINDS,
            demandOption: true,
            describe: "figure kind",
          })
          .option("in", {
            type: "string",
            demandOption: true,
            describe: "input CSV path",
          })
          .option("out", {
            type: "string",
            demandOption: true,
            describe: "output SVG path",
          })
          .option("labels", {
            type: "string",
            describe: "JSON object mapping method keys to legend labels",
          }),
      (args) => {
        try {
          const result = render({
            kind: args.kind as FigureKind,
            input: args.in as string,
            output: args.out as string,
            methodLabels: args.labels
              ? (JSON.parse(args.labels) as Record<string, string>)
              : undefined,
          });
          if (result.warning) {
            console.warn(`warning: ${result.warning}`);
          }
          console.log(`wrote ${result.output}`);
        } catch (err) {
          if (err instanceof SchemaError) {
            console.error(`schema error: ${err.message}`);
          } else {
            console.error(String(err));
          }
          exitCode = 1;
        }
      },
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(msg ?? String(err));
      exitCode = 2;
    })
    .parseAsync();
  return exitCode;
}

const invokedDirectly = process.argv[1]?.endsWith("cli.js");
if (invokedDirectly) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
