mod two_site_dimer {
    include!("../examples/two_site_dimer.rs");
}
mod fock_sectors {
    include!("../examples/fock_sectors.rs");
}
mod formal_products {
    include!("../examples/formal_products.rs");
}
mod ring_assembly {
    include!("../examples/ring_assembly.rs");
}
mod oracle_check {
    include!("../examples/oracle_check.rs");
}
mod config_pipeline {
    include!("../examples/config_pipeline.rs");
}

#[test]
fn examples_run() {
    two_site_dimer::main();
    fock_sectors::main();
    formal_products::main();
    ring_assembly::main();
    oracle_check::main();
    config_pipeline::main();
}
